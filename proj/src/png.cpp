// Copyright 2026 The normadd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "normadd/png.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "normadd/errors.hpp"

namespace normadd {

namespace {

void png_warn(png_structp, png_const_charp) {}

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
  if (image.width == 0 || image.height == 0 ||
      image.pixels.size() != image.width * image.height) {
    throw InvalidArgument("encode_png: pixel count does not match extent");
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn);
  if (png == nullptr) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png encoding failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        v->insert(v->end(), data, data + n);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < image.height; ++r) {
    png_write_row(png, image.pixels.data() + r * image.width);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, "not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn);
  if (png == nullptr) throw Error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  GrayImage img;
  ReadCursor cursor{bytes, 0};
  // libpng reports errors by longjmp; no C++ object is created between here
  // and the reads below.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(FormatErrorKind::kInvalidValue, "malformed PNG");
  }
  png_set_read_fn(png, &cursor, [](png_structp p, png_bytep data, png_size_t n) {
    auto* c = static_cast<ReadCursor*>(png_get_io_ptr(p));
    if (c->pos + n > c->bytes.size()) png_error(p, "truncated PNG");
    std::memcpy(data, c->bytes.data() + c->pos, n);
    c->pos += n;
  });
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_color_type(png, info) & PNG_COLOR_MASK_COLOR) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);
  img.width = png_get_image_width(png, info);
  img.height = png_get_image_height(png, info);
  img.pixels.resize(img.width * img.height);
  for (std::size_t r = 0; r < img.height; ++r) {
    png_read_row(png, img.pixels.data() + r * img.width, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

QuantizedMap quantize_map(const ScoreGrid& grid) {
  if (grid.empty()) throw InvalidArgument("quantize_map: empty grid");
  QuantizedMap q;
  const auto [lo, hi] = std::minmax_element(grid.values.begin(), grid.values.end());
  q.min = *lo;
  q.max = *hi;
  q.image.width = grid.width;
  q.image.height = grid.height;
  q.image.pixels.resize(grid.values.size(), 0);
  const double range = q.max - q.min;
  if (range > 0.0) {
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
      const double level = std::round((grid.values[i] - q.min) / range * 255.0);
      q.image.pixels[i] = static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
    }
  }
  return q;
}

}  // namespace normadd

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

#include "normadd/stub_encoder.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "normadd/errors.hpp"

namespace normadd {

namespace {

constexpr std::uint64_t kLayerSalt = 0xd6e8feb86659fd93ULL;
constexpr std::uint64_t kRowSalt = 0xa0761d6478bd642fULL;
constexpr std::uint64_t kColSalt = 0xe7037ed1a0b428dbULL;
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kTextSalt = 0x74657874ULL;  // "text"

void fill_random(std::uint64_t key, std::span<double> out) {
  for (std::size_t c = 0; c < out.size(); ++c) {
    const std::uint64_t x = splitmix_mix(key + (c + 1) * kGolden);
    out[c] = 2.0 * static_cast<double>(x >> 40) / 16777216.0 - 1.0;
  }
}

void normalize_into(std::span<const double> v, std::span<float> out) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double n = std::sqrt(sq);
  if (n == 0.0) throw InvalidArgument("stub vector collapsed to zero");
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(v[i] / n);
  }
}

std::uint64_t patch_key(std::uint64_t image_key, std::size_t layer,
                        std::size_t row, std::size_t col) {
  std::uint64_t k = splitmix_mix(image_key ^ (layer + 1) * kLayerSalt);
  k = splitmix_mix(k ^ (row + 1) * kRowSalt);
  return splitmix_mix(k ^ (col + 1) * kColSalt);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix_mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

bool RegionBias::contains(std::size_t row, std::size_t col, std::size_t height,
                          std::size_t width) const {
  const double y = (static_cast<double>(row) + 0.5) / static_cast<double>(height);
  const double x = (static_cast<double>(col) + 0.5) / static_cast<double>(width);
  return y >= top && y < bottom && x >= left && x < right;
}

PatchGridSet stub_encode(std::string_view image_id, std::uint64_t seed,
                         std::span<const GridShape> layout,
                         std::span<const RegionBias> biases) {
  if (layout.empty()) throw InvalidArgument("stub_encode: empty layout");
  const std::uint64_t image_key =
      splitmix_mix(fnv1a64(image_id) ^ splitmix_mix(seed));

  PatchGridSet set;
  set.image_id = std::string(image_id);
  for (std::size_t l = 0; l < layout.size(); ++l) {
    const auto& shape = layout[l];
    if (shape.height == 0 || shape.width == 0 || shape.dim == 0) {
      throw InvalidArgument("stub_encode: layout entry has a zero extent");
    }
    for (const auto& b : biases) {
      if ((!b.layer || *b.layer == l) && b.bias.dim() != shape.dim) {
        throw InvalidArgument("stub_encode: bias dim does not match layer " +
                              std::to_string(l));
      }
    }
    std::vector<float> data(shape.height * shape.width * shape.dim);
    std::vector<double> raw(shape.dim);
    for (std::size_t i = 0; i < shape.height; ++i) {
      for (std::size_t j = 0; j < shape.width; ++j) {
        fill_random(patch_key(image_key, l, i, j), raw);
        for (const auto& b : biases) {
          if (b.layer && *b.layer != l) continue;
          if (!b.contains(i, j, shape.height, shape.width)) continue;
          for (std::size_t c = 0; c < shape.dim; ++c) raw[c] += b.bias[c];
        }
        const std::size_t offset = (i * shape.width + j) * shape.dim;
        normalize_into(raw, std::span<float>(data).subspan(offset, shape.dim));
      }
    }
    set.layers.emplace_back(shape.height, shape.width, shape.dim,
                            std::move(data));
  }

  const auto& last = set.layers.back();
  std::vector<double> mean(last.dim(), 0.0);
  for (std::size_t p = 0; p < last.patch_count(); ++p) {
    auto v = last.patch(p);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += v[c];
  }
  std::vector<float> global(last.dim());
  normalize_into(mean, global);
  set.global = Embedding(std::move(global));
  return set;
}

Embedding stub_text_embedding(std::string_view prompt, std::uint64_t seed,
                              std::size_t dim) {
  if (dim == 0) throw InvalidArgument("stub_text_embedding: zero dim");
  std::string keyed = "text:";
  keyed.append(prompt);
  const std::uint64_t key =
      splitmix_mix(fnv1a64(keyed) ^ splitmix_mix(seed ^ kTextSalt));
  std::vector<double> raw(dim);
  fill_random(key, raw);
  std::vector<float> out(dim);
  normalize_into(raw, out);
  return Embedding(std::move(out));
}

std::vector<GridShape> parse_layout(std::string_view text) {
  std::vector<GridShape> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(start, end - start);
    std::size_t values[3] = {0, 0, 0};
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      while (pos < item.size() && item[pos] == ' ') ++pos;
      auto [ptr, ec] =
          std::from_chars(item.data() + pos, item.data() + item.size(), values[k]);
      if (ec != std::errc() || values[k] == 0) {
        throw InvalidArgument("bad layout entry '" + std::string(item) +
                              "', expected HxWxD");
      }
      pos = static_cast<std::size_t>(ptr - item.data());
      if (k < 2) {
        if (pos >= item.size() || item[pos] != 'x') {
          throw InvalidArgument("bad layout entry '" + std::string(item) +
                                "', expected HxWxD");
        }
        ++pos;
      }
    }
    out.push_back({values[0], values[1], values[2]});
    start = end + 1;
  }
  if (out.empty()) throw InvalidArgument("empty layout");
  return out;
}

std::string format_layout(std::span<const GridShape> layout) {
  std::ostringstream os;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (i) os << ',';
    os << layout[i].height << 'x' << layout[i].width << 'x' << layout[i].dim;
  }
  return os.str();
}

}  // namespace normadd

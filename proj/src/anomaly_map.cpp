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

#include "normadd/anomaly_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "binary_io.hpp"
#include "normadd/errors.hpp"

namespace normadd {

ScoreGrid::ScoreGrid(std::size_t h, std::size_t w, std::vector<double> v)
    : height(h), width(w), values(std::move(v)) {
  if (values.size() != height * width) {
    throw InvalidArgument("score grid holds " + std::to_string(values.size()) +
                          " values for a " + std::to_string(height) + "x" +
                          std::to_string(width) + " lattice");
  }
}

namespace {

struct Sample {
  std::size_t lo, hi;
  double frac;
};

std::vector<Sample> sample_axis(std::size_t in, std::size_t out) {
  std::vector<Sample> s(out);
  for (std::size_t i = 0; i < out; ++i) {
    if (in == 1 || out == 1) {
      s[i] = {0, 0, 0.0};
      continue;
    }
    const double pos = static_cast<double>(i) * static_cast<double>(in - 1) /
                       static_cast<double>(out - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    lo = std::min(lo, in - 1);
    const std::size_t hi = std::min(lo + 1, in - 1);
    s[i] = {lo, hi, pos - static_cast<double>(lo)};
  }
  return s;
}

}  // namespace

ScoreGrid resize_bilinear(const ScoreGrid& in, MapSize out) {
  if (in.empty()) throw InvalidArgument("resize of an empty grid");
  if (out.height == 0 || out.width == 0) {
    throw InvalidArgument("resize to an empty lattice");
  }
  if (in.size() == out) return in;
  const auto rows = sample_axis(in.height, out.height);
  const auto cols = sample_axis(in.width, out.width);
  ScoreGrid res(out.height, out.width);
  for (std::size_t i = 0; i < out.height; ++i) {
    const auto& r = rows[i];
    for (std::size_t j = 0; j < out.width; ++j) {
      const auto& c = cols[j];
      const double top = in.at(r.lo, c.lo) * (1.0 - c.frac) + in.at(r.lo, c.hi) * c.frac;
      const double bot = in.at(r.hi, c.lo) * (1.0 - c.frac) + in.at(r.hi, c.hi) * c.frac;
      res.at(i, j) = top * (1.0 - r.frac) + bot * r.frac;
    }
  }
  return res;
}

ScoreGrid gaussian_smooth(const ScoreGrid& in, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("smoothing sigma must be finite and >= 0");
  }
  if (sigma == 0.0 || in.empty()) return in;
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  const auto h = static_cast<std::ptrdiff_t>(in.height);
  const auto w = static_cast<std::ptrdiff_t>(in.width);
  auto clamp = [](std::ptrdiff_t v, std::ptrdiff_t n) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, n - 1));
  };
  ScoreGrid tmp(in.height, in.width);
  for (std::ptrdiff_t i = 0; i < h; ++i) {
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               in.at(static_cast<std::size_t>(i), clamp(j + k, w));
      }
      tmp.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = acc;
    }
  }
  ScoreGrid out(in.height, in.width);
  for (std::ptrdiff_t i = 0; i < h; ++i) {
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               tmp.at(clamp(i + k, h), static_cast<std::size_t>(j));
      }
      out.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = acc;
    }
  }
  return out;
}

void AnomalyMap::validate() const {
  if (grid.empty()) throw InvalidArgument("anomaly map is empty");
  for (double v : grid.values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument("anomaly map entries must be finite and >= 0");
    }
  }
}

double score_from_map(const AnomalyMap& map) {
  if (map.grid.empty()) throw InvalidArgument("score of an empty map");
  return *std::max_element(map.grid.values.begin(), map.grid.values.end());
}

namespace {

constexpr std::string_view kMagic = "NAAM";

}  // namespace

std::vector<std::uint8_t> encode_map_file(const ScoreGrid& grid) {
  if (grid.empty()) throw InvalidArgument("cannot write an empty map");
  if (grid.height > std::numeric_limits<std::uint16_t>::max() ||
      grid.width > std::numeric_limits<std::uint16_t>::max()) {
    throw InvalidArgument("map too large for the NAAM header");
  }
  detail::ByteWriter w;
  w.magic(kMagic);
  w.u16(kMapFileVersion);
  w.u16(static_cast<std::uint16_t>(grid.height));
  w.u16(static_cast<std::uint16_t>(grid.width));
  for (double v : grid.values) w.f32(static_cast<float>(v));
  return w.take();
}

ScoreGrid decode_map_file(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "NAAM");
  r.expect_magic(kMagic);
  r.expect_version(kMapFileVersion);
  const std::size_t h = r.u16();
  const std::size_t w = r.u16();
  if (h == 0 || w == 0) {
    throw FormatError(FormatErrorKind::kDimensionMismatch, "map has a zero extent");
  }
  auto raw = r.f32s(h * w);
  r.expect_end();
  std::vector<double> values(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      throw FormatError(FormatErrorKind::kInvalidValue, "non-finite map score");
    }
    if (raw[i] < 0.0f) {
      throw FormatError(FormatErrorKind::kInvalidValue,
                        "negative map score at index " + std::to_string(i));
    }
    values[i] = raw[i];
  }
  return ScoreGrid(h, w, std::move(values));
}

void write_map_file(const ScoreGrid& grid, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_map_file(grid));
}

AnomalyMap load_external_map(const std::filesystem::path& path) {
  return AnomalyMap{decode_map_file(detail::read_file_bytes(path)),
                    "external:" + path.filename().string()};
}

}  // namespace normadd

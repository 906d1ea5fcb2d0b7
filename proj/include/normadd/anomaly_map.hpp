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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace normadd {

struct MapSize {
  std::size_t height = 0;
  std::size_t width = 0;

  friend bool operator==(const MapSize&, const MapSize&) = default;
};

/// Row-major grid of double-precision scores.
struct ScoreGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  ScoreGrid() = default;
  ScoreGrid(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), values(h * w, fill) {}
  ScoreGrid(std::size_t h, std::size_t w, std::vector<double> v);

  MapSize size() const noexcept { return {height, width}; }
  bool empty() const noexcept { return values.empty(); }
  double& at(std::size_t r, std::size_t c) { return values[r * width + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * width + c]; }

  friend bool operator==(const ScoreGrid&, const ScoreGrid&) = default;
};

/// Corner-aligned bilinear resampling: output pixel (i, j) samples the input
/// at (i * (H_in - 1) / (H_out - 1), j * (W_in - 1) / (W_out - 1)). A
/// one-pixel axis on either side samples coordinate 0. Every output value is
/// a convex combination of input values.
ScoreGrid resize_bilinear(const ScoreGrid& in, MapSize out);

/// Separable Gaussian blur with a kernel truncated at ceil(3 sigma) and
/// replicated borders. sigma == 0 returns the input unchanged.
ScoreGrid gaussian_smooth(const ScoreGrid& in, double sigma);

/// Per-position abnormality scores. Entries are finite and non-negative.
struct AnomalyMap {
  ScoreGrid grid;
  std::string origin;

  void validate() const;
};

/// Image-level anomaly score: the maximum entry.
double score_from_map(const AnomalyMap& map);

// NAAM map files: "NAAM", version u16 = 1, height u16, width u16, then
// height * width f32 little-endian scores, row-major.
inline constexpr std::uint16_t kMapFileVersion = 1;

std::vector<std::uint8_t> encode_map_file(const ScoreGrid& grid);
/// Rejects non-finite and negative scores.
ScoreGrid decode_map_file(std::span<const std::uint8_t> bytes);

void write_map_file(const ScoreGrid& grid, const std::filesystem::path& path);
AnomalyMap load_external_map(const std::filesystem::path& path);

}  // namespace normadd

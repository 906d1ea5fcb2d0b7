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
#include <span>
#include <vector>

#include "normadd/anomaly_map.hpp"

namespace normadd {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

/// 8-bit grayscale PNG bytes.
std::vector<std::uint8_t> encode_png(const GrayImage& image);
GrayImage decode_png(std::span<const std::uint8_t> bytes);

struct QuantizedMap {
  GrayImage image;
  double min = 0.0;
  double max = 0.0;
};

/// Linear map of [min, max] onto 0..255 (round to nearest). A constant map
/// becomes all zeros.
QuantizedMap quantize_map(const ScoreGrid& grid);

}  // namespace normadd

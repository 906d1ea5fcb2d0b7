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

// Deterministic stand-in for a vision-language encoder.
//
// Every vector is derived from a 64-bit key with a counter-based generator.
// The construction below is frozen: golden files depend on it bit for bit.
//
//   mix(z)       = SplitMix64 finalizer
//                  z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//                  z ^= z >> 27; z *= 0x94d049bb133111eb; z ^= z >> 31
//   patch key    = k0 = mix(fnv1a64(image_id) ^ mix(seed))
//                  k1 = mix(k0 ^ (layer + 1) * 0xd6e8feb86659fd93)
//                  k2 = mix(k1 ^ (row + 1)   * 0xa0761d6478bd642f)
//                  k  = mix(k2 ^ (col + 1)   * 0xe7037ed1a0b428db)
//   text key     = mix(fnv1a64("text:" + prompt) ^ mix(seed ^ 0x74657874))
//   component c  = x = mix(k + (c + 1) * 0x9e3779b97f4a7c15)
//                  value = 2 * (x >> 40) / 2^24 - 1      (exact in double)
//
// The raw vector (plus any region bias, summed in double) is divided by its
// L2 norm and rounded to float. Only IEEE-exact operations are used, so the
// output does not depend on the platform's libm.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "normadd/embedding.hpp"

namespace normadd {

struct GridShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t dim = 0;

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Additive bias applied to every patch whose centre falls inside the
/// half-open normalized rectangle [top, bottom) x [left, right).
/// Coordinates are fractions of the grid extent so one region addresses the
/// same image area in layers of different resolution.
struct RegionBias {
  double top = 0.0;
  double left = 0.0;
  double bottom = 1.0;
  double right = 1.0;
  Embedding bias;
  std::optional<std::size_t> layer;  // nullopt: every layer

  bool contains(std::size_t row, std::size_t col, std::size_t height,
                std::size_t width) const;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix_mix(std::uint64_t z);

/// Unit-norm pseudo-random patch embeddings keyed by (image_id, seed, layer,
/// row, col). Patches inside a bias region become the renormalized sum of
/// the random vector and all applicable biases. The global vector is the
/// renormalized mean of the last layer's patches.
PatchGridSet stub_encode(std::string_view image_id, std::uint64_t seed,
                         std::span<const GridShape> layout,
                         std::span<const RegionBias> biases = {});

/// Unit-norm pseudo-random text embedding keyed by (prompt, seed).
Embedding stub_text_embedding(std::string_view prompt, std::uint64_t seed,
                              std::size_t dim);

/// Parses "HxWxD[,HxWxD...]".
std::vector<GridShape> parse_layout(std::string_view text);
std::string format_layout(std::span<const GridShape> layout);

}  // namespace normadd

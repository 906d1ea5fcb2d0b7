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
#include <vector>

#include "normadd/embedding.hpp"

namespace normadd {

/// Immutable set of normal patch embeddings with exact nearest-neighbour
/// queries (linear scan).
class FeatureBank {
 public:
  FeatureBank(std::size_t dim, std::vector<float> entries,
              double coreset_fraction, std::size_t source_count);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size() / dim_; }
  double coreset_fraction() const noexcept { return coreset_fraction_; }
  std::size_t source_count() const noexcept { return source_count_; }
  std::span<const float> entry(std::size_t i) const;

  /// Euclidean distance from `query` to its nearest entry.
  double nearest_distance(std::span<const float> query) const;

  friend bool operator==(const FeatureBank&, const FeatureBank&) = default;

 private:
  std::size_t dim_;
  std::vector<float> entries_;
  double coreset_fraction_;
  std::size_t source_count_;
};

/// ceil(fraction * n), with a 1e-9 allowance so that e.g. 0.2 * 10 is 2.
std::size_t coreset_size(double fraction, std::size_t n);

/// Farthest-point-first selection of k indices under Euclidean distance.
/// The first centre is index 0; each next centre maximizes the distance to
/// its nearest selected centre, ties going to the lowest index. The result
/// is in selection order and depends only on the input order.
std::vector<std::size_t> greedy_k_center(std::span<const Embedding> points,
                                         std::size_t k);

/// Fraction 1 keeps every input; smaller fractions keep the greedy k-center
/// subsample of size coreset_size(fraction, n).
FeatureBank build_bank(std::span<const Embedding> normal_patches,
                       double coreset_fraction);

// NAFB bank files: "NAFB", version u16 = 1, dim u16, count u32,
// source_count u32, coreset_fraction f64, then count * dim f32 entries.
inline constexpr std::uint16_t kBankFileVersion = 1;

std::vector<std::uint8_t> encode_bank_file(const FeatureBank& bank);
FeatureBank decode_bank_file(std::span<const std::uint8_t> bytes);
void write_bank_file(const FeatureBank& bank, const std::filesystem::path& path);
FeatureBank read_bank_file(const std::filesystem::path& path);

}  // namespace normadd

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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace normadd {

/// A dense embedding vector. Storage is 32-bit; arithmetic on it is done in
/// double precision by the free functions below.
///
/// Invariants: non-empty and every entry finite. Both are checked on
/// construction.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<float> values);
  Embedding(std::initializer_list<float> values);

  /// Builds from double-precision values, rounding each to float.
  static Embedding from_doubles(std::span<const double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::span<const float> values() const noexcept { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }

  double norm() const;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<float> values_;
};

/// One layer of patch embeddings: a height x width lattice of dim-length
/// vectors, stored row-major.
class GridLayer {
 public:
  GridLayer() = default;
  GridLayer(std::size_t height, std::size_t width, std::size_t dim,
            std::vector<float> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t patch_count() const noexcept { return height_ * width_; }

  std::span<const float> patch(std::size_t row, std::size_t col) const;
  std::span<const float> patch(std::size_t flat_index) const;
  std::span<const float> data() const noexcept { return data_; }

  friend bool operator==(const GridLayer&, const GridLayer&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

/// Per-image encoder output: one or more patch grids plus an optional global
/// image vector.
struct PatchGridSet {
  std::string image_id;
  std::vector<GridLayer> layers;
  std::optional<Embedding> global;

  /// Throws InvalidArgument when the set has no layers or holds non-finite
  /// values.
  void validate() const;

  friend bool operator==(const PatchGridSet&, const PatchGridSet&) = default;
};

double dot(std::span<const float> a, std::span<const float> b);
double l2_norm(std::span<const float> v);

/// Cosine of the angle between a and b.
/// Throws InvalidArgument on dimension mismatch or a zero-norm input.
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(const Embedding& a, const Embedding& b);

/// Softmax of scaled cosine similarities between g and each feature:
///   p_i = exp(s * sim(g, f_i)) / sum_j exp(s * sim(g, f_j))
/// with s = logit_scale (1 reproduces the plain definition). Uses the
/// max-shift trick.
std::vector<double> softmax_over(std::span<const float> g,
                                 std::span<const Embedding> features,
                                 double logit_scale = 1.0);
std::vector<double> softmax_over(const Embedding& g,
                                 std::span<const Embedding> features,
                                 double logit_scale = 1.0);

/// Softmax over a precomputed similarity vector. Shared by the detectors,
/// which cache normalized text features.
std::vector<double> softmax_of_similarities(std::span<const double> sims,
                                            double logit_scale = 1.0);

/// Unit-length copy of v in double precision. Throws on zero norm.
std::vector<double> normalized(std::span<const float> v);

}  // namespace normadd

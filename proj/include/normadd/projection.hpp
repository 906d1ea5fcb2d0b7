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

// Per-layer affine maps from patch space into text space. Weights are
// loaded from NAPJ files and never trained here.
//
// NAPJ layout (little-endian): "NAPJ", version u16 = 1, n_layers u8, then per
// layer: in_dim u16, out_dim u16, matrix (out_dim x in_dim f32, row-major),
// offset (out_dim f32). A layer with in_dim == out_dim == 0 carries no
// payload and means identity.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace normadd {

struct AffineMap {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<float> matrix;  // out_dim x in_dim
  std::vector<float> offset;  // out_dim

  void validate() const;
  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

class ProjectionSpec {
 public:
  ProjectionSpec() = default;  // identity for every layer
  explicit ProjectionSpec(std::vector<std::optional<AffineMap>> layers);

  /// Output dim for a layer whose patches have `in_dim` components.
  std::size_t output_dim(std::size_t layer, std::size_t in_dim) const;

  /// Projects one patch into `out` (resized as needed), in double precision.
  void apply(std::size_t layer, std::span<const float> patch,
             std::vector<double>& out) const;

  const std::vector<std::optional<AffineMap>>& layers() const noexcept { return layers_; }
  bool is_identity() const noexcept;

  friend bool operator==(const ProjectionSpec&, const ProjectionSpec&) = default;

 private:
  const AffineMap* map_for(std::size_t layer) const;

  std::vector<std::optional<AffineMap>> layers_;
};

inline constexpr std::uint16_t kProjectionFileVersion = 1;

std::vector<std::uint8_t> encode_projection_file(const ProjectionSpec& spec);
ProjectionSpec decode_projection_file(std::span<const std::uint8_t> bytes);
void write_projection_file(const ProjectionSpec& spec, const std::filesystem::path& path);
ProjectionSpec read_projection_file(const std::filesystem::path& path);

}  // namespace normadd

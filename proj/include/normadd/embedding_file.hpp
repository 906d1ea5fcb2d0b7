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

// NAEB embedding files.
//
// Layout (little-endian, no padding):
//
//   "NAEB"                       4 bytes
//   version                      u16 = 1
//   image_id length              u16, followed by that many UTF-8 bytes
//   n_layers                     u8
//   per layer: height, width, dim  u16 each
//   has_global                   u8 (0 or 1)
//   global dim                   u16, only when has_global == 1
//   payload                      each layer's row-major grid of f32, in
//                                declared order, then the global vector
//
// A short payload reports kTruncatedPayload; trailing bytes past the declared
// payload report kDimensionMismatch.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "normadd/embedding.hpp"

namespace normadd {

inline constexpr std::uint16_t kEmbeddingFileVersion = 1;

std::vector<std::uint8_t> encode_embedding_file(const PatchGridSet& set);
PatchGridSet decode_embedding_file(std::span<const std::uint8_t> bytes);

void write_embedding_file(const PatchGridSet& set,
                          const std::filesystem::path& path);
PatchGridSet read_embedding_file(const std::filesystem::path& path);

/// Packs an ordered list of equal-length vectors into a single-layer set of
/// shape N x 1 x dim. This is how prompt-embedding files are stored.
PatchGridSet pack_vectors(std::string id, std::span<const Embedding> vectors);
std::vector<Embedding> unpack_vectors(const PatchGridSet& set);

}  // namespace normadd

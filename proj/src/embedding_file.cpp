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

#include "normadd/embedding_file.hpp"

#include <cmath>
#include <limits>

#include "binary_io.hpp"
#include "normadd/errors.hpp"

namespace normadd {

namespace {

constexpr std::string_view kMagic = "NAEB";

std::uint16_t checked_u16(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint16_t>::max()) {
    throw InvalidArgument(std::string(what) + " exceeds the u16 range of the "
                          "embedding file header");
  }
  return static_cast<std::uint16_t>(v);
}

void require_finite(std::span<const float> values) {
  for (float v : values) {
    if (!std::isfinite(v)) {
      throw FormatError(FormatErrorKind::kInvalidValue,
                        "embedding payload holds a non-finite value");
    }
  }
}

struct LayerShape {
  std::size_t height, width, dim;
};

}  // namespace

std::vector<std::uint8_t> encode_embedding_file(const PatchGridSet& set) {
  set.validate();
  if (set.layers.size() > std::numeric_limits<std::uint8_t>::max()) {
    throw InvalidArgument("too many layers for an embedding file");
  }
  detail::ByteWriter w;
  w.magic(kMagic);
  w.u16(kEmbeddingFileVersion);
  w.u16(checked_u16(set.image_id.size(), "image_id length"));
  w.bytes(set.image_id);
  w.u8(static_cast<std::uint8_t>(set.layers.size()));
  for (const auto& layer : set.layers) {
    w.u16(checked_u16(layer.height(), "layer height"));
    w.u16(checked_u16(layer.width(), "layer width"));
    w.u16(checked_u16(layer.dim(), "layer dim"));
  }
  w.u8(set.global ? 1 : 0);
  if (set.global) w.u16(checked_u16(set.global->dim(), "global dim"));
  for (const auto& layer : set.layers) w.f32s(layer.data());
  if (set.global) w.f32s(set.global->values());
  return w.take();
}

PatchGridSet decode_embedding_file(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "NAEB");
  r.expect_magic(kMagic);
  r.expect_version(kEmbeddingFileVersion);

  PatchGridSet set;
  set.image_id = r.string(r.u16());

  const std::size_t n_layers = r.u8();
  if (n_layers == 0) {
    throw FormatError(FormatErrorKind::kDimensionMismatch,
                      "embedding file declares zero layers");
  }
  std::vector<LayerShape> shapes;
  shapes.reserve(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    LayerShape s{r.u16(), r.u16(), r.u16()};
    if (s.height == 0 || s.width == 0 || s.dim == 0) {
      throw FormatError(FormatErrorKind::kDimensionMismatch,
                        "layer " + std::to_string(l) + " has a zero extent");
    }
    shapes.push_back(s);
  }

  const auto has_global = r.u8();
  if (has_global > 1) {
    throw FormatError(FormatErrorKind::kInvalidValue,
                      "has_global flag must be 0 or 1");
  }
  std::size_t global_dim = 0;
  if (has_global) {
    global_dim = r.u16();
    if (global_dim == 0) {
      throw FormatError(FormatErrorKind::kDimensionMismatch,
                        "global vector has zero dim");
    }
  }

  std::size_t payload = global_dim;
  for (const auto& s : shapes) payload += s.height * s.width * s.dim;
  r.need(payload * sizeof(float));

  for (const auto& s : shapes) {
    auto data = r.f32s(s.height * s.width * s.dim);
    require_finite(data);
    set.layers.emplace_back(s.height, s.width, s.dim, std::move(data));
  }
  if (has_global) {
    auto data = r.f32s(global_dim);
    require_finite(data);
    set.global = Embedding(std::move(data));
  }
  r.expect_end();
  return set;
}

void write_embedding_file(const PatchGridSet& set,
                          const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_embedding_file(set));
}

PatchGridSet read_embedding_file(const std::filesystem::path& path) {
  return decode_embedding_file(detail::read_file_bytes(path));
}

PatchGridSet pack_vectors(std::string id, std::span<const Embedding> vectors) {
  if (vectors.empty()) throw InvalidArgument("no vectors to pack");
  const std::size_t dim = vectors.front().dim();
  std::vector<float> data;
  data.reserve(vectors.size() * dim);
  for (const auto& v : vectors) {
    if (v.dim() != dim) throw InvalidArgument("packed vectors differ in dim");
    data.insert(data.end(), v.values().begin(), v.values().end());
  }
  PatchGridSet set;
  set.image_id = std::move(id);
  set.layers.emplace_back(vectors.size(), 1, dim, std::move(data));
  return set;
}

std::vector<Embedding> unpack_vectors(const PatchGridSet& set) {
  if (set.layers.size() != 1 || set.layers.front().width() != 1) {
    throw FormatError(FormatErrorKind::kDimensionMismatch,
                      "vector file must hold a single N x 1 layer");
  }
  const auto& layer = set.layers.front();
  std::vector<Embedding> out;
  out.reserve(layer.height());
  for (std::size_t i = 0; i < layer.height(); ++i) {
    auto p = layer.patch(i);
    out.emplace_back(std::vector<float>(p.begin(), p.end()));
  }
  return out;
}

}  // namespace normadd

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

#include "normadd/projection.hpp"

#include <cmath>
#include <limits>

#include "binary_io.hpp"
#include "normadd/errors.hpp"

namespace normadd {

void AffineMap::validate() const {
  if (in_dim == 0 || out_dim == 0) throw InvalidArgument("affine map with zero dim");
  if (matrix.size() != in_dim * out_dim || offset.size() != out_dim) {
    throw InvalidArgument("affine map storage does not match its dims");
  }
}

ProjectionSpec::ProjectionSpec(std::vector<std::optional<AffineMap>> layers)
    : layers_(std::move(layers)) {
  for (const auto& m : layers_) {
    if (m) m->validate();
  }
}

const AffineMap* ProjectionSpec::map_for(std::size_t layer) const {
  if (layer >= layers_.size() || !layers_[layer]) return nullptr;
  return &*layers_[layer];
}

bool ProjectionSpec::is_identity() const noexcept {
  for (const auto& m : layers_) {
    if (m) return false;
  }
  return true;
}

std::size_t ProjectionSpec::output_dim(std::size_t layer, std::size_t in_dim) const {
  const auto* m = map_for(layer);
  if (m == nullptr) return in_dim;
  if (m->in_dim != in_dim) {
    throw InvalidArgument("projection for layer " + std::to_string(layer) +
                          " expects dim " + std::to_string(m->in_dim) + ", got " +
                          std::to_string(in_dim));
  }
  return m->out_dim;
}

void ProjectionSpec::apply(std::size_t layer, std::span<const float> patch,
                           std::vector<double>& out) const {
  const auto* m = map_for(layer);
  if (m == nullptr) {
    out.assign(patch.begin(), patch.end());
    return;
  }
  if (patch.size() != m->in_dim) {
    throw InvalidArgument("projection input dimension mismatch");
  }
  out.resize(m->out_dim);
  for (std::size_t o = 0; o < m->out_dim; ++o) {
    double acc = m->offset[o];
    const float* row = m->matrix.data() + o * m->in_dim;
    for (std::size_t i = 0; i < m->in_dim; ++i) {
      acc += static_cast<double>(row[i]) * static_cast<double>(patch[i]);
    }
    out[o] = acc;
  }
}

namespace {

constexpr std::string_view kMagic = "NAPJ";

}  // namespace

std::vector<std::uint8_t> encode_projection_file(const ProjectionSpec& spec) {
  if (spec.layers().size() > std::numeric_limits<std::uint8_t>::max()) {
    throw InvalidArgument("too many projection layers");
  }
  detail::ByteWriter w;
  w.magic(kMagic);
  w.u16(kProjectionFileVersion);
  w.u8(static_cast<std::uint8_t>(spec.layers().size()));
  for (const auto& m : spec.layers()) {
    if (!m) {
      w.u16(0);
      w.u16(0);
      continue;
    }
    if (m->in_dim > 0xffff || m->out_dim > 0xffff) {
      throw InvalidArgument("projection dims exceed u16");
    }
    w.u16(static_cast<std::uint16_t>(m->in_dim));
    w.u16(static_cast<std::uint16_t>(m->out_dim));
    w.f32s(m->matrix);
    w.f32s(m->offset);
  }
  return w.take();
}

ProjectionSpec decode_projection_file(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "NAPJ");
  r.expect_magic(kMagic);
  r.expect_version(kProjectionFileVersion);
  const std::size_t n = r.u8();
  std::vector<std::optional<AffineMap>> layers;
  for (std::size_t l = 0; l < n; ++l) {
    const std::size_t in = r.u16();
    const std::size_t out = r.u16();
    if (in == 0 && out == 0) {
      layers.emplace_back(std::nullopt);
      continue;
    }
    if (in == 0 || out == 0) {
      throw FormatError(FormatErrorKind::kDimensionMismatch,
                        "projection layer " + std::to_string(l) + " has one zero dim");
    }
    AffineMap m;
    m.in_dim = in;
    m.out_dim = out;
    m.matrix = r.f32s(in * out);
    m.offset = r.f32s(out);
    for (float v : m.matrix) {
      if (!std::isfinite(v)) throw FormatError(FormatErrorKind::kInvalidValue, "non-finite weight");
    }
    for (float v : m.offset) {
      if (!std::isfinite(v)) throw FormatError(FormatErrorKind::kInvalidValue, "non-finite offset");
    }
    layers.emplace_back(std::move(m));
  }
  r.expect_end();
  return ProjectionSpec(std::move(layers));
}

void write_projection_file(const ProjectionSpec& spec, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_projection_file(spec));
}

ProjectionSpec read_projection_file(const std::filesystem::path& path) {
  return decode_projection_file(detail::read_file_bytes(path));
}

}  // namespace normadd

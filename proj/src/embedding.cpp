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

#include "normadd/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "normadd/errors.hpp"

namespace normadd {

std::string_view to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::kBadMagic:
      return "bad magic";
    case FormatErrorKind::kVersionMismatch:
      return "version mismatch";
    case FormatErrorKind::kTruncatedPayload:
      return "truncated payload";
    case FormatErrorKind::kDimensionMismatch:
      return "dimension mismatch";
    case FormatErrorKind::kInvalidValue:
      return "invalid value";
    case FormatErrorKind::kIo:
      return "io error";
  }
  return "unknown";
}

namespace {

void require_finite(std::span<const float> values, const char* what) {
  for (float v : values) {
    if (!std::isfinite(v)) {
      throw InvalidArgument(std::string(what) + " holds a non-finite value");
    }
  }
}

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(a) +
                          " vs " + std::to_string(b));
  }
}

}  // namespace

Embedding::Embedding(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("embedding must be non-empty");
  require_finite(values_, "embedding");
}

Embedding::Embedding(std::initializer_list<float> values)
    : Embedding(std::vector<float>(values)) {}

Embedding Embedding::from_doubles(std::span<const double> values) {
  std::vector<float> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(),
                 [](double v) { return static_cast<float>(v); });
  return Embedding(std::move(out));
}

double Embedding::norm() const { return l2_norm(values_); }

GridLayer::GridLayer(std::size_t height, std::size_t width, std::size_t dim,
                     std::vector<float> data)
    : height_(height), width_(width), dim_(dim), data_(std::move(data)) {
  if (height_ == 0 || width_ == 0 || dim_ == 0) {
    throw InvalidArgument("grid layer dimensions must be positive");
  }
  if (data_.size() != height_ * width_ * dim_) {
    throw InvalidArgument("grid layer payload has " +
                          std::to_string(data_.size()) + " values, expected " +
                          std::to_string(height_ * width_ * dim_));
  }
}

std::span<const float> GridLayer::patch(std::size_t row,
                                        std::size_t col) const {
  return patch(row * width_ + col);
}

std::span<const float> GridLayer::patch(std::size_t flat_index) const {
  return std::span<const float>(data_).subspan(flat_index * dim_, dim_);
}

void PatchGridSet::validate() const {
  if (layers.empty()) throw InvalidArgument("patch grid set has no layers");
  for (const auto& layer : layers) {
    if (layer.patch_count() == 0 || layer.dim() == 0) {
      throw InvalidArgument("patch grid set has an empty layer");
    }
    require_finite(layer.data(), "patch grid");
  }
}

double dot(std::span<const float> a, std::span<const float> b) {
  require_same_dim(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double l2_norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  require_same_dim(a.size(), b.size());
  if (a.empty()) throw InvalidArgument("cosine of empty vectors");
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw InvalidArgument("cosine similarity of a zero-norm vector");
  }
  const double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  return cosine_similarity(a.values(), b.values());
}

std::vector<double> softmax_of_similarities(std::span<const double> sims,
                                            double logit_scale) {
  if (sims.empty()) throw InvalidArgument("softmax over an empty list");
  const double top = logit_scale * *std::max_element(sims.begin(), sims.end());
  std::vector<double> out(sims.size());
  double total = 0.0;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    out[i] = std::exp(logit_scale * sims[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> softmax_over(std::span<const float> g,
                                 std::span<const Embedding> features,
                                 double logit_scale) {
  if (features.empty()) throw InvalidArgument("softmax over an empty list");
  std::vector<double> sims;
  sims.reserve(features.size());
  for (const auto& f : features) {
    sims.push_back(cosine_similarity(g, f.values()));
  }
  return softmax_of_similarities(sims, logit_scale);
}

std::vector<double> softmax_over(const Embedding& g,
                                 std::span<const Embedding> features,
                                 double logit_scale) {
  return softmax_over(g.values(), features, logit_scale);
}

std::vector<double> normalized(std::span<const float> v) {
  const double n = l2_norm(v);
  if (n == 0.0) throw InvalidArgument("cannot normalize a zero-norm vector");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

}  // namespace normadd

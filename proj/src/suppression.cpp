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

#include "normadd/suppression.hpp"

#include <cmath>

#include "normadd/errors.hpp"

namespace normadd {

void SuppressionMap::validate() const {
  if (grid.empty()) throw InvalidArgument("suppression map is empty");
  for (double v : grid.values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("suppression map entry outside [0, 1]");
    }
  }
}

SuppressionMap suppression_map(const PatchGridSet& set, const TextFeature& f_add,
                               const TextFeature& f_nor, const ProjectionSpec& projection,
                               const SuppressionOptions& options) {
  const auto selected = resolve_layers(set, options.layers);
  ScoreGrid acc(options.size.height, options.size.width, 0.0);
  for (auto l : selected) {
    const auto layer_map = resize_bilinear(
        text_affinity_grid(set.layers[l], l, projection, f_add, f_nor, options.logit_scale),
        options.size);
    for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += layer_map.values[i];
  }
  const double n = static_cast<double>(selected.size());
  for (double& v : acc.values) v = std::min(1.0, v / n);
  return SuppressionMap{std::move(acc), {}};
}

AnomalyMap apply_suppression(const AnomalyMap& a, const SuppressionMap& s) {
  a.validate();
  s.validate();
  const ScoreGrid& sup = s.grid.size() == a.grid.size()
                             ? s.grid
                             : resize_bilinear(s.grid, a.grid.size());
  AnomalyMap out{ScoreGrid(a.grid.height, a.grid.width), a.origin};
  for (std::size_t i = 0; i < out.grid.values.size(); ++i) {
    out.grid.values[i] = a.grid.values[i] * (1.0 - sup.values[i]);
  }
  return out;
}

SuppressionMap combine_suppression(const SuppressionMap& s1, const SuppressionMap& s2) {
  s1.validate();
  s2.validate();
  const ScoreGrid second = resize_bilinear(s2.grid, s1.grid.size());
  SuppressionMap out{ScoreGrid(s1.grid.height, s1.grid.width),
                     s1.normality + "+" + s2.normality};
  for (std::size_t i = 0; i < out.grid.values.size(); ++i) {
    out.grid.values[i] = 1.0 - (1.0 - s1.grid.values[i]) * (1.0 - second.values[i]);
  }
  return out;
}

SuppressedDetector::SuppressedDetector(std::shared_ptr<const Detector> base,
                                       NormalitySpec spec, TextFeature f_add,
                                       TextFeature f_nor, ProjectionSpec projection,
                                       SuppressionOptions options)
    : base_(std::move(base)),
      spec_(std::move(spec)),
      f_add_(std::move(f_add)),
      f_nor_(std::move(f_nor)),
      projection_(std::move(projection)),
      options_(std::move(options)) {
  if (!base_) throw InvalidArgument("suppressed detector needs a base detector");
  if (f_add_.vector.dim() != f_nor_.vector.dim()) {
    throw InvalidArgument("addition and normal text features differ in dim");
  }
}

const TextFeature* SuppressedDetector::normal_feature() const noexcept {
  return base_->normal_feature();
}

SuppressionMap SuppressedDetector::suppression_for(const PatchGridSet& set) const {
  auto s = suppression_map(set, f_add_, f_nor_, projection_, options_);
  s.normality = spec_.normality_text;
  return s;
}

AnomalyMap SuppressedDetector::score(const PatchGridSet& set) const {
  auto out = apply_suppression(base_->score(set), suppression_for(set));
  out.origin = "suppressed(" + out.origin + ", " + spec_.normality_text + ")";
  return out;
}

std::shared_ptr<const SuppressedDetector> add_normality(
    std::shared_ptr<const Detector> base, const NormalitySpec& spec,
    const EncoderClient& text_encoder, const ProjectionSpec& projection,
    const PromptLibrary& prompts, SuppressionOptions options) {
  if (!base) throw InvalidArgument("add_normality: no base detector");
  const auto addition = prompts.addition_prompts(spec);
  auto f_add = encode_prompt_set(addition, text_encoder, FeatureRole::kAddition);
  TextFeature f_nor = base->normal_feature() != nullptr
                          ? *base->normal_feature()
                          : encode_prompt_set(prompts.normal_prompts(spec.class_name),
                                              text_encoder, FeatureRole::kNormal);
  return std::make_shared<const SuppressedDetector>(std::move(base), spec, std::move(f_add),
                                                    std::move(f_nor), projection,
                                                    std::move(options));
}

}  // namespace normadd

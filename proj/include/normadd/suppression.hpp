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

// Normality addition by normality detection.
//
// A text-described normality t becomes an "addition" text feature f_add (the
// mean embedding of its phrase x template prompts). For a query image the
// suppression map marks where patches look more like f_add than like the
// normal-state feature f_nor:
//
//   S^l(i,j) = softmax(project(patch^l(i,j)), {f_add, f_nor})[f_add]
//   S        = mean over layers of resize(S^l)        (entries in [0, 1])
//
// and any detector's anomaly map A is attenuated pointwise:
//
//   A_final = A * (1 - resize(S, lattice of A))
//
// Layers are averaged rather than summed so that 1 - S stays a valid
// attenuation factor. Because S is in [0, 1] and A >= 0, A_final <= A
// everywhere, and so the image score max(A_final) never exceeds max(A).
// Two additions compose as one with S = 1 - (1 - S1)(1 - S2), hence the
// order of stacked additions does not matter.
//
// The map is applied to raw detector output without rescaling A; AUROC only
// depends on the ranking of max(A_final), which a global positive scaling of
// A leaves unchanged.

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "normadd/anomaly_map.hpp"
#include "normadd/detectors.hpp"
#include "normadd/encoder.hpp"
#include "normadd/projection.hpp"
#include "normadd/prompts.hpp"

namespace normadd {

inline constexpr MapSize kDefaultSuppressionSize{256, 256};

struct SuppressionOptions {
  MapSize size = kDefaultSuppressionSize;
  std::vector<std::size_t> layers;  // empty: all layers
  double logit_scale = 1.0;
};

struct SuppressionMap {
  ScoreGrid grid;
  std::string normality;

  /// Throws InvalidArgument unless every entry is in [0, 1].
  void validate() const;
};

SuppressionMap suppression_map(const PatchGridSet& set, const TextFeature& f_add,
                               const TextFeature& f_nor, const ProjectionSpec& projection,
                               const SuppressionOptions& options = {});

/// A * (1 - S), with S resized to the lattice of A.
AnomalyMap apply_suppression(const AnomalyMap& a, const SuppressionMap& s);

/// 1 - (1 - s1)(1 - s2) on a common lattice (s2 is resized to s1's).
SuppressionMap combine_suppression(const SuppressionMap& s1, const SuppressionMap& s2);

class SuppressedDetector final : public Detector {
 public:
  SuppressedDetector(std::shared_ptr<const Detector> base, NormalitySpec spec,
                     TextFeature f_add, TextFeature f_nor, ProjectionSpec projection,
                     SuppressionOptions options = {});

  AnomalyMap score(const PatchGridSet& set) const override;
  DetectorKind kind() const noexcept override { return DetectorKind::kSuppressed; }
  /// Passes the base detector's normal feature through, so stacked
  /// additions keep comparing against the same normal state.
  const TextFeature* normal_feature() const noexcept override;

  SuppressionMap suppression_for(const PatchGridSet& set) const;

  const Detector& base() const noexcept { return *base_; }
  const NormalitySpec& spec() const noexcept { return spec_; }
  const TextFeature& addition_feature() const noexcept { return f_add_; }
  const TextFeature& suppression_normal_feature() const noexcept { return f_nor_; }

 private:
  std::shared_ptr<const Detector> base_;
  NormalitySpec spec_;
  TextFeature f_add_;
  TextFeature f_nor_;
  ProjectionSpec projection_;
  SuppressionOptions options_;
};

/// Builds the addition prompts from spec.phrases and the library templates,
/// encodes and averages them into f_add, and wraps `base`. f_nor is the base
/// detector's own normal feature when it has one, else the library's generic
/// normal ensemble for spec.class_name.
std::shared_ptr<const SuppressedDetector> add_normality(
    std::shared_ptr<const Detector> base, const NormalitySpec& spec,
    const EncoderClient& text_encoder, const ProjectionSpec& projection,
    const PromptLibrary& prompts, SuppressionOptions options = {});

}  // namespace normadd

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

// Base anomaly detectors behind one map-producing interface:
//   - zero-shot text detector: per layer, softmax of patch/text cosine
//     against {abnormal, normal}, resized to the output lattice, summed over
//     layers (entries in [0, L]);
//   - feature-bank detector: distance to the nearest normal patch;
//   - external detector: pre-scored NAAM files from a third-party model.

#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "normadd/anomaly_map.hpp"
#include "normadd/embedding.hpp"
#include "normadd/feature_bank.hpp"
#include "normadd/projection.hpp"
#include "normadd/prompts.hpp"

namespace normadd {

enum class DetectorKind { kZeroShotText, kFeatureBank, kExternalMapFile, kSuppressed };

std::string_view to_string(DetectorKind kind);

/// score() is deterministic and safe to call concurrently.
class Detector {
 public:
  virtual ~Detector() = default;

  virtual AnomalyMap score(const PatchGridSet& set) const = 0;
  virtual DetectorKind kind() const noexcept = 0;

  /// The detector's own normal-state text feature, if it has one.
  virtual const TextFeature* normal_feature() const noexcept { return nullptr; }
};

/// Map of softmax(project(patch), {target, normal})[target] at the layer's
/// own grid resolution. Shared by the zero-shot detector (target = abnormal)
/// and suppression maps (target = added normality).
ScoreGrid text_affinity_grid(const GridLayer& layer, std::size_t layer_index,
                             const ProjectionSpec& projection,
                             const TextFeature& target, const TextFeature& normal,
                             double logit_scale = 1.0);

/// Resolves a layer selection against a set; empty selection means all.
std::vector<std::size_t> resolve_layers(const PatchGridSet& set,
                                        std::span<const std::size_t> selection);

/// Sum over selected layers of the resized abnormal-affinity maps.
AnomalyMap zs_anomaly_map(const PatchGridSet& set, const TextFeature& f_nor,
                          const TextFeature& f_abn, const ProjectionSpec& projection,
                          MapSize out_size, std::span<const std::size_t> layers = {},
                          double logit_scale = 1.0);

/// Nearest-bank-entry distance per patch of one layer, resized to out_size.
AnomalyMap bank_anomaly_map(const PatchGridSet& set, const FeatureBank& bank,
                            std::size_t layer_index, MapSize out_size);

struct ZeroShotOptions {
  MapSize out_size{256, 256};
  std::vector<std::size_t> layers;  // empty: all layers in the input
  double logit_scale = 1.0;
  double smoothing_sigma = 0.0;
};

class ZeroShotDetector final : public Detector {
 public:
  ZeroShotDetector(TextFeature f_nor, TextFeature f_abn, ProjectionSpec projection,
                   ZeroShotOptions options = {});

  AnomalyMap score(const PatchGridSet& set) const override;
  DetectorKind kind() const noexcept override { return DetectorKind::kZeroShotText; }
  const TextFeature* normal_feature() const noexcept override { return &f_nor_; }

  const TextFeature& abnormal_feature() const noexcept { return f_abn_; }

 private:
  TextFeature f_nor_;
  TextFeature f_abn_;
  ProjectionSpec projection_;
  ZeroShotOptions options_;
};

struct BankOptions {
  MapSize out_size{256, 256};
  std::size_t layer = 0;
  double smoothing_sigma = 0.0;
};

class FeatureBankDetector final : public Detector {
 public:
  FeatureBankDetector(std::shared_ptr<const FeatureBank> bank, BankOptions options = {});

  AnomalyMap score(const PatchGridSet& set) const override;
  DetectorKind kind() const noexcept override { return DetectorKind::kFeatureBank; }

 private:
  std::shared_ptr<const FeatureBank> bank_;
  BankOptions options_;
};

/// Looks up <root>/<image_id>.naam for each scored image.
class ExternalMapDetector final : public Detector {
 public:
  explicit ExternalMapDetector(std::filesystem::path root);

  AnomalyMap score(const PatchGridSet& set) const override;
  DetectorKind kind() const noexcept override { return DetectorKind::kExternalMapFile; }

 private:
  std::filesystem::path root_;
};

}  // namespace normadd

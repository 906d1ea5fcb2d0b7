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

#include "normadd/detectors.hpp"

#include <cmath>

#include "normadd/errors.hpp"

namespace normadd {

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::kZeroShotText:
      return "zero_shot_text";
    case DetectorKind::kFeatureBank:
      return "feature_bank";
    case DetectorKind::kExternalMapFile:
      return "external_map_file";
    case DetectorKind::kSuppressed:
      return "suppressed";
  }
  return "unknown";
}

ScoreGrid text_affinity_grid(const GridLayer& layer, std::size_t layer_index,
                             const ProjectionSpec& projection,
                             const TextFeature& target, const TextFeature& normal,
                             double logit_scale) {
  const std::size_t text_dim = projection.output_dim(layer_index, layer.dim());
  if (target.vector.dim() != text_dim || normal.vector.dim() != text_dim) {
    throw InvalidArgument("layer " + std::to_string(layer_index) + " projects to dim " +
                          std::to_string(text_dim) + " but text features have dim " +
                          std::to_string(target.vector.dim()) + "/" +
                          std::to_string(normal.vector.dim()));
  }
  const auto t = normalized(target.vector.values());
  const auto n = normalized(normal.vector.values());

  ScoreGrid grid(layer.height(), layer.width());
  std::vector<double> p;
  for (std::size_t idx = 0; idx < layer.patch_count(); ++idx) {
    projection.apply(layer_index, layer.patch(idx), p);
    double sq = 0.0, dt = 0.0, dn = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      sq += p[c] * p[c];
      dt += p[c] * t[c];
      dn += p[c] * n[c];
    }
    if (sq == 0.0) throw InvalidArgument("zero-norm patch embedding");
    const double norm = std::sqrt(sq);
    const double sims[2] = {dt / norm, dn / norm};
    grid.values[idx] = softmax_of_similarities(sims, logit_scale)[0];
  }
  return grid;
}

std::vector<std::size_t> resolve_layers(const PatchGridSet& set,
                                        std::span<const std::size_t> selection) {
  set.validate();
  std::vector<std::size_t> out;
  if (selection.empty()) {
    for (std::size_t l = 0; l < set.layers.size(); ++l) out.push_back(l);
    return out;
  }
  for (auto l : selection) {
    if (l >= set.layers.size()) {
      throw InvalidArgument("layer index " + std::to_string(l) + " out of range (" +
                            std::to_string(set.layers.size()) + " layers)");
    }
    out.push_back(l);
  }
  return out;
}

AnomalyMap zs_anomaly_map(const PatchGridSet& set, const TextFeature& f_nor,
                          const TextFeature& f_abn, const ProjectionSpec& projection,
                          MapSize out_size, std::span<const std::size_t> layers,
                          double logit_scale) {
  const auto selected = resolve_layers(set, layers);
  ScoreGrid total(out_size.height, out_size.width, 0.0);
  for (auto l : selected) {
    const auto layer_map = resize_bilinear(
        text_affinity_grid(set.layers[l], l, projection, f_abn, f_nor, logit_scale),
        out_size);
    for (std::size_t i = 0; i < total.values.size(); ++i) {
      total.values[i] += layer_map.values[i];
    }
  }
  return AnomalyMap{std::move(total), "zero_shot_text"};
}

AnomalyMap bank_anomaly_map(const PatchGridSet& set, const FeatureBank& bank,
                            std::size_t layer_index, MapSize out_size) {
  if (layer_index >= set.layers.size()) {
    throw InvalidArgument("bank layer index " + std::to_string(layer_index) +
                          " out of range");
  }
  set.validate();
  const auto& layer = set.layers[layer_index];
  if (layer.dim() != bank.dim()) {
    throw InvalidArgument("layer dim " + std::to_string(layer.dim()) +
                          " does not match bank dim " + std::to_string(bank.dim()));
  }
  ScoreGrid grid(layer.height(), layer.width());
  for (std::size_t idx = 0; idx < layer.patch_count(); ++idx) {
    grid.values[idx] = bank.nearest_distance(layer.patch(idx));
  }
  return AnomalyMap{resize_bilinear(grid, out_size), "feature_bank"};
}

ZeroShotDetector::ZeroShotDetector(TextFeature f_nor, TextFeature f_abn,
                                   ProjectionSpec projection, ZeroShotOptions options)
    : f_nor_(std::move(f_nor)),
      f_abn_(std::move(f_abn)),
      projection_(std::move(projection)),
      options_(std::move(options)) {
  if (f_nor_.vector.dim() != f_abn_.vector.dim()) {
    throw InvalidArgument("normal and abnormal text features differ in dim");
  }
}

AnomalyMap ZeroShotDetector::score(const PatchGridSet& set) const {
  auto map = zs_anomaly_map(set, f_nor_, f_abn_, projection_, options_.out_size,
                            options_.layers, options_.logit_scale);
  map.grid = gaussian_smooth(map.grid, options_.smoothing_sigma);
  return map;
}

FeatureBankDetector::FeatureBankDetector(std::shared_ptr<const FeatureBank> bank,
                                         BankOptions options)
    : bank_(std::move(bank)), options_(options) {
  if (!bank_) throw InvalidArgument("feature bank detector needs a bank");
}

AnomalyMap FeatureBankDetector::score(const PatchGridSet& set) const {
  auto map = bank_anomaly_map(set, *bank_, options_.layer, options_.out_size);
  map.grid = gaussian_smooth(map.grid, options_.smoothing_sigma);
  return map;
}

ExternalMapDetector::ExternalMapDetector(std::filesystem::path root)
    : root_(std::move(root)) {}

AnomalyMap ExternalMapDetector::score(const PatchGridSet& set) const {
  auto path = root_ / std::filesystem::path(set.image_id);
  path += ".naam";
  if (!std::filesystem::exists(path)) {
    throw NotFound("no external map for '" + set.image_id + "' at " + path.string());
  }
  return load_external_map(path);
}

}  // namespace normadd

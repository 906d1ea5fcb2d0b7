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

// Synthetic fixtures for the stub encoder.
//
// A plant table says which text directions to add to which image regions.
// Directions are named, not stored, and resolved against the prompt library
// and the text encoder at load time:
//
//   "normal"          normal-state ensemble of the image's class
//   "abnormal"        abnormal-state ensemble of the image's class
//   "addition:<t>"    addition ensemble of normality t (fallback phrases)
//
// Each direction is the L2-normalized ensemble mean times the term weight.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "normadd/encoder.hpp"
#include "normadd/prompts.hpp"
#include "normadd/stub_encoder.hpp"

namespace normadd {

struct PlantTerm {
  std::string feature;
  double weight = 1.0;
};

struct PlantRegion {
  double top = 0.0;
  double left = 0.0;
  double bottom = 1.0;
  double right = 1.0;
  std::vector<PlantTerm> terms;
};

struct PlantTable {
  std::vector<PlantTerm> global;  // whole-image terms for every image
  std::map<std::string, std::vector<PlantRegion>> images;  // key: "<class>/<id>"

  nlohmann::json to_json() const;
  static PlantTable from_json(const nlohmann::json& j);
  static PlantTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Resolves every named direction once; the returned resolver is pure and
/// thread-safe. Throws InvalidArgument for an unknown feature name.
PlantResolver make_plant_resolver(const PlantTable& table, const PromptLibrary& library,
                                  const EncoderClient& text_encoder);

/// One class, normal train images, good test images and two anomaly groups.
/// Defects of both groups carry the abnormal direction plus the addition
/// direction of their own group name; the first group's abnormal weight is
/// boosted so that, unsuppressed, it outscores the second group.
struct SyntheticWorld {
  std::string class_name = "widget";
  std::string added_group = "scuff";
  std::string kept_group = "crack";
  std::size_t n_train = 8;
  std::size_t n_good = 12;
  std::size_t n_per_group = 12;
  std::uint64_t seed = 42;
  std::vector<GridShape> layout{{16, 16, 128}, {8, 8, 128}};
  double normal_weight = 1.0;
  double abnormal_weight = 1.5;
  double group_weight = 1.5;
  double added_group_boost = 1.4;
  double region_extent = 0.3;
  std::size_t image_side = 64;
};

/// Image keys of the world, grouped as in the dataset tree.
std::vector<std::string> synthetic_image_keys(const SyntheticWorld& world);

PlantTable synthetic_plants(const SyntheticWorld& world);

/// Writes <root>/<class>/{train,test}/... PNG images, <root>/groups.txt and
/// <root>/plants.json. Pixel content mirrors the planted regions.
void write_synthetic_dataset(const SyntheticWorld& world, const std::filesystem::path& root);

}  // namespace normadd

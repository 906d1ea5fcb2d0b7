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

#include "normadd/synthetic.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "binary_io.hpp"
#include "normadd/errors.hpp"
#include "normadd/png.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace normadd {

namespace {

constexpr std::string_view kAdditionPrefix = "addition:";

json terms_to_json(const std::vector<PlantTerm>& terms) {
  json out = json::array();
  for (const auto& t : terms) out.push_back({{"feature", t.feature}, {"weight", t.weight}});
  return out;
}

std::vector<PlantTerm> terms_from_json(const json& j) {
  std::vector<PlantTerm> out;
  for (const auto& t : j) out.push_back({t.at("feature").get<std::string>(), t.at("weight").get<double>()});
  return out;
}

std::string class_of(std::string_view key) {
  const auto slash = key.find('/');
  return std::string(key.substr(0, slash));
}

void check_feature_name(const std::string& feature) {
  const bool addition = feature.rfind(kAdditionPrefix, 0) == 0 &&
                        feature.size() > kAdditionPrefix.size();
  if (feature != "normal" && feature != "abnormal" && !addition) {
    throw InvalidArgument("unknown plant feature '" + feature + "'");
  }
}

Embedding resolve_direction(const std::string& cls, const std::string& feature,
                            const PromptLibrary& library, const EncoderClient& text) {
  TextFeature f;
  if (feature == "normal") {
    f = encode_prompt_set(library.normal_prompts(cls), text, FeatureRole::kNormal);
  } else if (feature == "abnormal") {
    f = encode_prompt_set(library.abnormal_prompts(cls), text, FeatureRole::kAbnormal);
  } else if (feature.rfind(kAdditionPrefix, 0) == 0) {
    auto spec = generate_phrases(NormalitySpec{cls, feature.substr(kAdditionPrefix.size()), {}});
    f = encode_prompt_set(library.addition_prompts(spec), text, FeatureRole::kAddition);
  } else {
    throw InvalidArgument("unknown plant feature '" + feature + "'");
  }
  return Embedding::from_doubles(normalized(f.vector.values()));
}

Embedding weighted_sum(const std::vector<PlantTerm>& terms,
                       const std::map<std::string, Embedding>& directions) {
  std::vector<double> acc;
  for (const auto& t : terms) {
    const auto& d = directions.at(t.feature);
    if (acc.empty()) acc.assign(d.dim(), 0.0);
    for (std::size_t c = 0; c < d.dim(); ++c) acc[c] += t.weight * static_cast<double>(d[c]);
  }
  return Embedding::from_doubles(acc);
}

}  // namespace

json PlantTable::to_json() const {
  json images_j = json::object();
  for (const auto& [key, regions] : images) {
    json rs = json::array();
    for (const auto& r : regions) {
      rs.push_back({{"top", r.top},
                    {"left", r.left},
                    {"bottom", r.bottom},
                    {"right", r.right},
                    {"terms", terms_to_json(r.terms)}});
    }
    images_j[key] = std::move(rs);
  }
  return {{"version", 1}, {"global", terms_to_json(global)}, {"images", std::move(images_j)}};
}

PlantTable PlantTable::from_json(const json& j) {
  try {
    if (j.at("version").get<int>() != 1) {
      throw FormatError(FormatErrorKind::kVersionMismatch, "plant table version");
    }
    PlantTable t;
    t.global = terms_from_json(j.at("global"));
    for (const auto& [key, rs] : j.at("images").items()) {
      auto& regions = t.images[key];
      for (const auto& r : rs) {
        regions.push_back(PlantRegion{r.at("top").get<double>(), r.at("left").get<double>(),
                                      r.at("bottom").get<double>(), r.at("right").get<double>(),
                                      terms_from_json(r.at("terms"))});
      }
    }
    return t;
  } catch (const json::exception& e) {
    throw FormatError(FormatErrorKind::kInvalidValue, std::string("plant table: ") + e.what());
  }
}

PlantTable PlantTable::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open plant table " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw FormatError(FormatErrorKind::kInvalidValue, std::string("plant table: ") + e.what());
  }
}

void PlantTable::save(const fs::path& path) const {
  const auto text = to_json().dump(2) + "\n";
  detail::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                            text.size()));
}

PlantResolver make_plant_resolver(const PlantTable& table, const PromptLibrary& library,
                                  const EncoderClient& text_encoder) {
  for (const auto& t : table.global) check_feature_name(t.feature);
  std::set<std::string> classes;
  for (const auto& [key, regions] : table.images) {
    classes.insert(class_of(key));
    for (const auto& r : regions) {
      for (const auto& t : r.terms) check_feature_name(t.feature);
    }
  }

  // (class, feature) -> unit direction
  std::map<std::string, std::map<std::string, Embedding>> directions;
  auto need = [&](const std::string& cls, const std::vector<PlantTerm>& terms) {
    for (const auto& t : terms) {
      auto& per_class = directions[cls];
      if (!per_class.count(t.feature)) {
        per_class.emplace(t.feature, resolve_direction(cls, t.feature, library, text_encoder));
      }
    }
  };
  for (const auto& cls : classes) need(cls, table.global);
  for (const auto& [key, regions] : table.images) {
    for (const auto& r : regions) need(class_of(key), r.terms);
  }

  // Fully resolved biases per image key, plus the per-class global bias.
  std::map<std::string, std::vector<RegionBias>, std::less<>> per_image;
  std::map<std::string, RegionBias, std::less<>> global;
  if (!table.global.empty()) {
    for (const auto& cls : classes) {
      global.emplace(cls, RegionBias{0.0, 0.0, 1.0, 1.0,
                                     weighted_sum(table.global, directions.at(cls)), {}});
    }
  }
  for (const auto& [key, regions] : table.images) {
    auto& out = per_image[key];
    for (const auto& r : regions) {
      if (r.terms.empty()) continue;
      out.push_back(RegionBias{r.top, r.left, r.bottom, r.right,
                               weighted_sum(r.terms, directions.at(class_of(key))), {}});
    }
  }
  return [per_image = std::move(per_image),
          global = std::move(global)](std::string_view image_id) {
    std::vector<RegionBias> out;
    if (auto g = global.find(class_of(image_id)); g != global.end()) out.push_back(g->second);
    if (auto it = per_image.find(image_id); it != per_image.end()) {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
  };
}

namespace {

std::string stem(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

// Deterministic region origin in [0.1, 0.6) per axis.
std::pair<double, double> region_origin(const std::string& key, std::uint64_t seed) {
  const auto h = splitmix_mix(fnv1a64(key) ^ splitmix_mix(seed ^ 0x726567696f6eULL));
  const double u = static_cast<double>(h >> 40) / 16777216.0;
  const double v = static_cast<double>((h >> 16) & 0xffffffULL) / 16777216.0;
  return {0.1 + 0.5 * u, 0.1 + 0.5 * v};
}

}  // namespace

std::vector<std::string> synthetic_image_keys(const SyntheticWorld& w) {
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < w.n_train; ++i) keys.push_back(w.class_name + "/train/good/" + stem(i));
  for (std::size_t i = 0; i < w.n_good; ++i) keys.push_back(w.class_name + "/test/good/" + stem(i));
  for (const auto* g : {&w.kept_group, &w.added_group}) {
    for (std::size_t i = 0; i < w.n_per_group; ++i) {
      keys.push_back(w.class_name + "/test/" + *g + "/" + stem(i));
    }
  }
  return keys;
}

PlantTable synthetic_plants(const SyntheticWorld& w) {
  if (w.added_group == w.kept_group) throw InvalidArgument("synthetic groups must differ");
  PlantTable t;
  t.global.push_back({"normal", w.normal_weight});
  for (const auto* g : {&w.added_group, &w.kept_group}) {
    const double abn = w.abnormal_weight * (*g == w.added_group ? w.added_group_boost : 1.0);
    for (std::size_t i = 0; i < w.n_per_group; ++i) {
      const auto key = w.class_name + "/test/" + *g + "/" + stem(i);
      const auto [top, left] = region_origin(key, w.seed);
      t.images[key].push_back(PlantRegion{
          top, left, top + w.region_extent, left + w.region_extent,
          {{"abnormal", abn}, {std::string(kAdditionPrefix) + *g, w.group_weight}}});
    }
  }
  return t;
}

void write_synthetic_dataset(const SyntheticWorld& w, const fs::path& root) {
  const auto plants = synthetic_plants(w);
  const std::size_t side = w.image_side;
  for (const auto& key : synthetic_image_keys(w)) {
    GrayImage img{side, side, std::vector<std::uint8_t>(side * side, 96)};
    if (auto it = plants.images.find(key); it != plants.images.end()) {
      const bool added = key.find("/" + w.added_group + "/") != std::string::npos;
      for (const auto& r : it->second) {
        for (std::size_t y = 0; y < side; ++y) {
          for (std::size_t x = 0; x < side; ++x) {
            const double cy = (static_cast<double>(y) + 0.5) / static_cast<double>(side);
            const double cx = (static_cast<double>(x) + 0.5) / static_cast<double>(side);
            if (cy >= r.top && cy < r.bottom && cx >= r.left && cx < r.right) {
              img.pixels[y * side + x] = added ? 160 : 24;
            }
          }
        }
      }
    }
    const auto bytes = encode_png(img);
    detail::write_file_atomic(root / (key + ".png"), bytes);
  }
  const std::string groups = "# synthetic fixture groups\n" + w.class_name + " " +
                             w.added_group + " " + w.added_group + "\n" + w.class_name + " " +
                             w.kept_group + " " + w.kept_group + "\n";
  detail::write_file_atomic(
      root / "groups.txt",
      std::span(reinterpret_cast<const std::uint8_t*>(groups.data()), groups.size()));
  plants.save(root / "plants.json");
}

}  // namespace normadd

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

#include "normadd/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "normadd/errors.hpp"

namespace fs = std::filesystem;

namespace normadd {

GroupTable GroupTable::parse(std::istream& in) {
  GroupTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string cls, group, type;
    if (!(ls >> cls)) continue;
    if (!(ls >> group)) {
      throw FormatError(FormatErrorKind::kInvalidValue,
                        "group table line " + std::to_string(lineno) + ": missing group");
    }
    AnomalyGroup g{group, {}};
    while (ls >> type) g.types.push_back(type);
    if (g.types.empty()) {
      throw FormatError(FormatErrorKind::kInvalidValue,
                        "group table line " + std::to_string(lineno) + ": group '" +
                            group + "' lists no types");
    }
    for (const auto& t : g.types) {
      if (t == kGoodType) {
        throw FormatError(FormatErrorKind::kInvalidValue,
                          "group table line " + std::to_string(lineno) +
                              ": 'good' cannot belong to an anomaly group");
      }
    }
    table.groups_[cls].push_back(std::move(g));
  }
  return table;
}

GroupTable GroupTable::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open group table " + path.string());
  return parse(in);
}

const std::vector<AnomalyGroup>& GroupTable::groups_for(std::string_view class_name) const {
  static const std::vector<AnomalyGroup> kEmpty;
  auto it = groups_.find(class_name);
  return it == groups_.end() ? kEmpty : it->second;
}

std::vector<std::string> GroupTable::classes() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : groups_) out.push_back(k);
  return out;
}

const AnomalyGroup& ClassIndex::group(std::string_view group_name) const {
  for (const auto& g : groups) {
    if (g.name == group_name) return g;
  }
  throw ProtocolError("class '" + name + "' has no anomaly group '" +
                      std::string(group_name) + "'");
}

std::vector<std::string> ClassIndex::anomaly_types() const {
  std::set<std::string> types;
  for (const auto& img : test) {
    if (img.anomaly_type != kGoodType) types.insert(img.anomaly_type);
  }
  return {types.begin(), types.end()};
}

const ClassIndex& DatasetIndex::get(std::string_view class_name) const {
  for (const auto& c : classes) {
    if (c.name == class_name) return c;
  }
  throw ProtocolError("unknown class '" + std::string(class_name) + "'");
}

std::vector<std::string> DatasetIndex::class_names() const {
  std::vector<std::string> out;
  for (const auto& c : classes) out.push_back(c.name);
  return out;
}

namespace {

bool is_image_file(const fs::directory_entry& e) {
  if (!e.is_regular_file()) return false;
  const auto name = e.path().filename().string();
  if (name.empty() || name[0] == '.') return false;
  auto ext = e.path().extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  static const std::set<std::string> kExt = {".png", ".jpg", ".jpeg", ".bmp",
                                             ".tif", ".tiff", ".pgm", ".ppm"};
  return kExt.count(ext) > 0;
}

std::vector<fs::path> sorted_children(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : is_image_file(e)) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void collect(const std::string& cls, const fs::path& split_dir, const std::string& split,
             std::vector<ImageRef>& out, bool only_good) {
  for (const auto& type_dir : sorted_children(split_dir, true)) {
    const auto type = type_dir.filename().string();
    if (only_good && type != kGoodType) continue;
    for (const auto& file : sorted_children(type_dir, false)) {
      out.push_back(ImageRef{cls, split + "/" + type + "/" + file.stem().string(), type, file});
    }
  }
}

}  // namespace

DatasetIndex index_dataset(const fs::path& root, const GroupTable& table) {
  if (!fs::is_directory(root)) throw NotFound("dataset root " + root.string() + " does not exist");
  DatasetIndex index;
  index.root = root;
  for (const auto& class_dir : sorted_children(root, true)) {
    if (!fs::is_directory(class_dir / "test")) continue;
    ClassIndex ci;
    ci.name = class_dir.filename().string();
    collect(ci.name, class_dir / "train", "train", ci.train_normal, true);
    collect(ci.name, class_dir / "test", "test", ci.test, false);
    if (ci.test.empty()) throw ProtocolError("class '" + ci.name + "' has an empty test split");

    const auto present = ci.anomaly_types();
    std::map<std::string, std::string> owner;
    for (const auto& g : table.groups_for(ci.name)) {
      AnomalyGroup kept{g.name, {}};
      for (const auto& t : g.types) {
        if (auto [it, fresh] = owner.emplace(t, g.name); !fresh) {
          throw ProtocolError("anomaly type '" + t + "' of class '" + ci.name +
                              "' is in groups '" + it->second + "' and '" + g.name + "'");
        }
        if (std::binary_search(present.begin(), present.end(), t)) kept.types.push_back(t);
      }
      if (!kept.types.empty()) ci.groups.push_back(std::move(kept));
    }
    for (const auto& t : present) {
      if (t == kCombinedType || owner.count(t)) continue;
      ci.groups.push_back(AnomalyGroup{t, {t}});
    }
    std::sort(ci.groups.begin(), ci.groups.end(),
              [](const AnomalyGroup& a, const AnomalyGroup& b) { return a.name < b.name; });
    index.classes.push_back(std::move(ci));
  }
  if (index.classes.empty()) {
    throw NotFound("no class directories (with a test/ split) under " + root.string());
  }
  return index;
}

Scenario build_scenario(const DatasetIndex& index, std::string_view class_name,
                        std::string_view group_name) {
  const auto& ci = index.get(class_name);
  const auto& group = ci.group(group_name);
  Scenario sc;
  sc.class_name = ci.name;
  sc.added_group = group.name;
  std::size_t positives = 0;
  for (const auto& img : ci.test) {
    if (img.anomaly_type == kCombinedType) {
      sc.excluded.push_back(img);
      continue;
    }
    const bool normal =
        img.anomaly_type == kGoodType ||
        std::find(group.types.begin(), group.types.end(), img.anomaly_type) != group.types.end();
    sc.test.push_back(LabeledImage{img, normal ? 0 : 1});
    positives += normal ? 0 : 1;
  }
  if (positives == 0) {
    throw ProtocolError(std::string(kAllNormalError) + ": adding group '" + group.name +
                        "' to class '" + ci.name + "' leaves no abnormal test images");
  }
  if (positives == sc.test.size()) {
    throw ProtocolError(std::string(kAllAbnormalError) + ": class '" + ci.name +
                        "' has no normal test images");
  }
  return sc;
}

}  // namespace normadd

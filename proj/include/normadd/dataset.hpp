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

// Dataset indexing and normality-addition scenarios.
//
// Expected layout (MVTec AD style):
//   <root>/<class>/train/good/<image>
//   <root>/<class>/test/<anomaly_type>/<image>      ("good" for normal)
//
// A scenario takes one anomaly group of a class and relabels its images as
// normal (y = 0). "good" images stay normal, all other anomaly types stay
// abnormal (y = 1), and images of type "combined" are dropped because that
// type mixes every other type.

#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace normadd {

inline constexpr std::string_view kGoodType = "good";
inline constexpr std::string_view kCombinedType = "combined";
inline constexpr std::string_view kAllNormalError = "all-normal test set";
inline constexpr std::string_view kAllAbnormalError = "all-abnormal test set";

struct AnomalyGroup {
  std::string name;
  std::vector<std::string> types;

  friend bool operator==(const AnomalyGroup&, const AnomalyGroup&) = default;
};

/// class -> groups, as read from a "<class> <group> <type>..." text asset.
class GroupTable {
 public:
  static GroupTable parse(std::istream& in);
  static GroupTable load(const std::filesystem::path& path);

  /// Groups of a class in file order; empty when the class is not listed.
  const std::vector<AnomalyGroup>& groups_for(std::string_view class_name) const;
  std::vector<std::string> classes() const;

 private:
  std::map<std::string, std::vector<AnomalyGroup>, std::less<>> groups_;
};

struct ImageRef {
  std::string class_name;
  std::string id;             // class-relative, e.g. "test/thread/000"
  std::string anomaly_type;   // "good" for normal images
  std::filesystem::path path;

  /// Dataset-wide identifier used by encoders and caches: "<class>/<id>".
  std::string key() const { return class_name + "/" + id; }
};

struct ClassIndex {
  std::string name;
  std::vector<ImageRef> train_normal;
  std::vector<ImageRef> test;
  std::vector<AnomalyGroup> groups;  // sorted by name

  /// Throws ProtocolError for an unknown group.
  const AnomalyGroup& group(std::string_view name) const;
  std::vector<std::string> anomaly_types() const;  // sorted, no "good"
};

struct DatasetIndex {
  std::filesystem::path root;
  std::vector<ClassIndex> classes;  // sorted by name

  /// Throws ProtocolError for an unknown class.
  const ClassIndex& get(std::string_view class_name) const;
  std::vector<std::string> class_names() const;
};

/// Walks the dataset tree in lexicographic order. Test anomaly types that the
/// group table does not mention become singleton groups; groups whose types
/// are all absent from the data are dropped. Throws NotFound when the root
/// holds no class directories, ProtocolError for a class with an empty test
/// split or a type claimed by two groups.
DatasetIndex index_dataset(const std::filesystem::path& root, const GroupTable& table);

struct LabeledImage {
  ImageRef image;
  int label = 0;  // 1 = abnormal
};

struct Scenario {
  std::string class_name;
  std::string added_group;
  std::vector<LabeledImage> test;
  std::vector<ImageRef> excluded;
};

/// Throws ProtocolError for unknown class/group and for a result without
/// both labels (message contains kAllNormalError / kAllAbnormalError).
Scenario build_scenario(const DatasetIndex& index, std::string_view class_name,
                        std::string_view group);

}  // namespace normadd

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

// Published reference data for MVTec AD used by the tests: the anomaly
// grouping and the per-group AUROC (%) of the zero-shot text baseline before
// and after normality addition, with the printed class averages.

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace normadd::testing {

struct GroupRow {
  const char* cls;
  const char* group;
  std::vector<std::string> types;
};

inline const std::vector<GroupRow>& published_groups() {
  static const std::vector<GroupRow> rows = {
      {"bottle", "broken", {"broken_small", "broken_large"}},
      {"bottle", "contamination", {"contamination"}},
      {"cable", "missing_wire", {"missing_wire"}},
      {"cable", "cut_insulation",
       {"cut_inner_insulation", "cut_outer_insulation", "poke_insulation"}},
      {"cable", "missing_cable", {"missing_cable"}},
      {"cable", "cable_swap", {"cable_swap"}},
      {"cable", "bent_wire", {"bent_wire"}},
      {"capsule", "scratch", {"scratch"}},
      {"capsule", "squeeze", {"squeeze"}},
      {"capsule", "crack", {"crack", "poke"}},
      {"capsule", "faulty_imprint", {"faulty_imprint"}},
      {"carpet", "thread", {"thread"}},
      {"carpet", "metal", {"metal_contamination"}},
      {"carpet", "color", {"color"}},
      {"carpet", "cut", {"cut", "hole"}},
      {"grid", "thread", {"thread"}},
      {"grid", "bent", {"bent"}},
      {"grid", "glue", {"glue"}},
      {"grid", "metal", {"metal_contamination"}},
      {"grid", "broken", {"broken"}},
      {"hazelnut", "print", {"print"}},
      {"hazelnut", "cut", {"cut"}},
      {"hazelnut", "hole", {"hole", "crack"}},
      {"leather", "poke", {"poke"}},
      {"leather", "glue", {"glue"}},
      {"leather", "color", {"color"}},
      {"leather", "fold", {"fold"}},
      {"leather", "cut", {"cut"}},
      {"metal_nut", "bent", {"bent"}},
      {"metal_nut", "scratch", {"scratch"}},
      {"metal_nut", "color", {"color"}},
      {"metal_nut", "flip", {"flip"}},
      {"pill", "pill_type", {"pill_type"}},
      {"pill", "color", {"color"}},
      {"pill", "crack", {"crack", "scratch"}},
      {"pill", "faulty_imprint", {"faulty_imprint"}},
      {"pill", "contamination", {"contamination"}},
      {"screw", "scratch_head", {"scratch_head"}},
      {"screw", "scratch_neck", {"scratch_neck"}},
      {"screw", "manipulated_front", {"manipulated_front"}},
      {"screw", "thread", {"thread_top", "thread_side"}},
      {"tile", "oil", {"oil"}},
      {"tile", "gray_stroke", {"gray_stroke"}},
      {"tile", "rough", {"rough"}},
      {"tile", "crack", {"crack"}},
      {"tile", "glue_strip", {"glue_strip"}},
      {"transistor", "misplaced", {"misplaced"}},
      {"transistor", "damaged_case", {"damaged_case"}},
      {"transistor", "cut_lead", {"cut_lead"}},
      {"transistor", "bent_lead", {"bent_lead"}},
      {"wood", "scratch", {"scratch"}},
      {"wood", "liquid", {"liquid"}},
      {"wood", "color", {"color"}},
      {"wood", "hole", {"hole"}},
      {"zipper", "fabric", {"fabric_border", "fabric_interior"}},
      {"zipper", "teeth", {"broken_teeth", "squeezed_teeth", "split_teeth", "rough"}},
  };
  return rows;
}

struct AurocRow {
  const char* cls;
  const char* group;
  double before;
  double after;
};

inline const std::vector<AurocRow>& published_auroc() {
  static const std::vector<AurocRow> rows = {
      {"bottle", "broken", 23.5, 61.4},          {"bottle", "contamination", 89.8, 89.0},
      {"cable", "bent_wire", 53.0, 56.9},        {"cable", "cable_swap", 68.9, 69.1},
      {"cable", "cut_insulation", 57.7, 57.9},   {"cable", "missing_wire", 66.6, 71.6},
      {"cable", "missing_cable", 66.6, 68.8},    {"capsule", "crack", 48.0, 56.9},
      {"capsule", "faulty_imprint", 60.5, 64.2}, {"capsule", "scratch", 62.4, 60.2},
      {"capsule", "squeeze", 79.4, 77.5},        {"carpet", "color", 91.6, 92.2},
      {"carpet", "cut", 77.0, 69.5},             {"carpet", "metal", 69.4, 78.2},
      {"carpet", "thread", 73.6, 83.5},          {"grid", "bent", 88.1, 85.2},
      {"grid", "broken", 69.2, 75.8},            {"grid", "glue", 83.4, 87.2},
      {"grid", "metal", 74.5, 79.6},             {"grid", "thread", 90.2, 85.0},
      {"hazelnut", "cut", 81.7, 77.0},           {"hazelnut", "hole", 78.3, 72.1},
      {"hazelnut", "print", 80.5, 94.4},         {"leather", "color", 70.9, 93.7},
      {"leather", "cut", 77.2, 86.6},            {"leather", "fold", 94.8, 80.1},
      {"leather", "glue", 82.6, 82.5},           {"leather", "poke", 82.2, 90.6},
      {"metal_nut", "bent", 62.6, 67.2},         {"metal_nut", "color", 41.9, 52.7},
      {"metal_nut", "flip", 95.8, 95.9},         {"metal_nut", "scratch", 65.9, 61.8},
      {"pill", "color", 52.4, 73.7},             {"pill", "contamination", 63.4, 71.2},
      {"pill", "crack", 63.1, 69.1},             {"pill", "faulty_imprint", 56.4, 52.6},
      {"pill", "pill_type", 76.9, 81.7},         {"screw", "manipulated_front", 66.0, 67.3},
      {"screw", "scratch_head", 73.7, 70.3},     {"screw", "scratch_neck", 62.1, 65.7},
      {"screw", "thread", 58.6, 64.5},           {"tile", "crack", 84.5, 91.5},
      {"tile", "glue_strip", 73.0, 71.9},        {"tile", "gray_stroke", 86.1, 86.7},
      {"tile", "oil", 67.5, 79.8},               {"tile", "rough", 89.4, 94.4},
      {"transistor", "bent_lead", 64.4, 66.6},   {"transistor", "cut_lead", 60.1, 68.8},
      {"transistor", "damaged_case", 65.7, 72.2}, {"transistor", "misplaced", 76.2, 75.2},
      {"wood", "color", 78.7, 87.1},             {"wood", "hole", 80.8, 91.8},
      {"wood", "liquid", 84.6, 83.1},            {"wood", "scratch", 70.8, 75.7},
      {"zipper", "teeth", 76.0, 80.2},           {"zipper", "fabric", 57.9, 56.9},
  };
  return rows;
}

inline const std::map<std::string, std::pair<double, double>>& published_class_averages() {
  static const std::map<std::string, std::pair<double, double>> avg = {
      {"bottle", {56.6, 75.2}},   {"cable", {62.6, 64.9}},     {"capsule", {62.6, 64.7}},
      {"carpet", {77.9, 80.8}},   {"grid", {81.1, 82.6}},      {"hazelnut", {80.2, 81.2}},
      {"leather", {81.5, 86.7}},  {"metal_nut", {66.6, 69.4}}, {"pill", {62.4, 69.7}},
      {"screw", {65.1, 67.0}},    {"tile", {80.1, 84.9}},      {"transistor", {66.6, 70.7}},
      {"wood", {78.7, 84.4}},     {"zipper", {67.0, 68.6}},
  };
  return avg;
}

inline constexpr double kPublishedGlobalBefore = 70.6;
inline constexpr double kPublishedGlobalAfter = 75.1;

}  // namespace normadd::testing

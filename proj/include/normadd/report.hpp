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

// Before/after evaluation of a normality addition and its reporting.
//
// AUROC values are stored as fractions in [0, 1] and rendered as percentages
// with one decimal, rounded half to even. A table cell reads
// "73.6 → 83.5 (+9.9)"; the delta is the rounded exact difference, so it may
// differ in the last digit from the difference of the two rounded values.
//
// Averages are unweighted: a class average is the mean over that class's
// groups, the global average is the mean over class averages.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "normadd/dataset.hpp"
#include "normadd/detectors.hpp"
#include "normadd/encoder.hpp"

namespace normadd {

struct ScorePair {
  std::string image_id;
  int label = 0;
  double before = 0.0;
  double after = 0.0;
};

struct EvalReport {
  std::string class_name;
  std::string group;
  double auroc_before = 0.0;
  double auroc_after = 0.0;
  double delta = 0.0;  // auroc_after - auroc_before
  std::vector<ScorePair> scores;
};

/// Encodes every scenario image once and scores it with both detectors,
/// spreading images over `workers` threads (0: hardware concurrency). A
/// failure is rethrown as Error naming the image.
EvalReport run_before_after(const Detector& base, const Detector& suppressed,
                            const Scenario& scenario, const EncoderClient& encoder,
                            std::size_t workers = 0);

/// Builds a report from already-known AUROC values (no per-image scores).
EvalReport make_report(std::string class_name, std::string group, double before,
                       double after);

struct ClassSummary {
  std::string class_name;
  std::size_t groups = 0;
  double before = 0.0;
  double after = 0.0;
  double delta = 0.0;
};

struct ReportSummary {
  std::vector<ClassSummary> classes;  // first-appearance order
  double before = 0.0;
  double after = 0.0;
  double delta = 0.0;
};

/// Throws InvalidArgument for an empty list.
ReportSummary aggregate_report(std::span<const EvalReport> reports);

double round_half_even(double value, int decimals);
/// Fraction in [0, 1] -> "73.6".
std::string format_percent(double fraction);
/// "73.6 → 83.5 (+9.9)".
std::string render_cell(double before, double after);

/// One line per report, then per-class and global average lines.
std::string render_text(std::span<const EvalReport> reports, const ReportSummary& summary);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ReportSummary& summary);

}  // namespace normadd

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

#include "normadd/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "normadd/errors.hpp"
#include "normadd/metrics.hpp"

namespace normadd {

EvalReport run_before_after(const Detector& base, const Detector& suppressed,
                            const Scenario& scenario, const EncoderClient& encoder,
                            std::size_t workers) {
  const std::size_t n = scenario.test.size();
  EvalReport report;
  report.class_name = scenario.class_name;
  report.group = scenario.added_group;
  report.scores.resize(n);

  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr first_error;
  std::size_t failed_at = n;

  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto& item = scenario.test[i];
      try {
        const auto set = encoder.encode_image(item.image.key());
        report.scores[i] = ScorePair{item.image.key(), item.label,
                                     score_from_map(base.score(set)),
                                     score_from_map(suppressed.score(set))};
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (i < failed_at) {
          failed_at = i;
          first_error = std::current_exception();
        }
      }
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  if (first_error) {
    const auto ref = scenario.test[failed_at].image.key();
    try {
      std::rethrow_exception(first_error);
    } catch (const std::exception& e) {
      throw Error("scoring image '" + ref + "' failed: " + e.what());
    }
  }

  std::vector<double> before(n), after(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    before[i] = report.scores[i].before;
    after[i] = report.scores[i].after;
    labels[i] = report.scores[i].label;
  }
  report.auroc_before = auroc(before, labels);
  report.auroc_after = auroc(after, labels);
  report.delta = report.auroc_after - report.auroc_before;
  return report;
}

EvalReport make_report(std::string class_name, std::string group, double before,
                       double after) {
  EvalReport r;
  r.class_name = std::move(class_name);
  r.group = std::move(group);
  r.auroc_before = before;
  r.auroc_after = after;
  r.delta = after - before;
  return r;
}

ReportSummary aggregate_report(std::span<const EvalReport> reports) {
  if (reports.empty()) throw InvalidArgument("aggregate_report: no reports");
  ReportSummary s;
  for (const auto& r : reports) {
    auto it = std::find_if(s.classes.begin(), s.classes.end(),
                           [&](const ClassSummary& c) { return c.class_name == r.class_name; });
    if (it == s.classes.end()) {
      s.classes.push_back(ClassSummary{r.class_name, 0, 0.0, 0.0, 0.0});
      it = std::prev(s.classes.end());
    }
    it->groups += 1;
    it->before += r.auroc_before;
    it->after += r.auroc_after;
  }
  for (auto& c : s.classes) {
    c.before /= static_cast<double>(c.groups);
    c.after /= static_cast<double>(c.groups);
    c.delta = c.after - c.before;
    s.before += c.before;
    s.after += c.after;
  }
  s.before /= static_cast<double>(s.classes.size());
  s.after /= static_cast<double>(s.classes.size());
  s.delta = s.after - s.before;
  return s;
}

double round_half_even(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = value * scale;
  const double floor = std::floor(scaled);
  const double frac = scaled - floor;
  // Inputs such as 56.65 are not representable; treat values within 1e-6 of
  // a half step as exact halves.
  double rounded;
  if (std::fabs(frac - 0.5) < 1e-6) {
    rounded = std::fmod(floor, 2.0) == 0.0 ? floor : floor + 1.0;
  } else {
    rounded = std::round(scaled);
  }
  return rounded / scale;
}

namespace {

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  std::string s(buf);
  if (s == "-0.0") s = "0.0";
  return s;
}

}  // namespace

std::string format_percent(double fraction) {
  return fixed1(round_half_even(fraction * 100.0, 1));
}

std::string render_cell(double before, double after) {
  const double d = round_half_even((after - before) * 100.0, 1);
  const std::string delta = fixed1(d);
  return format_percent(before) + " → " + format_percent(after) + " (" +
         (delta[0] == '-' ? "" : "+") + delta + ")";
}

std::string render_text(std::span<const EvalReport> reports, const ReportSummary& summary) {
  std::ostringstream out;
  for (const auto& r : reports) {
    out << r.class_name << '\t' << r.group << '\t' << render_cell(r.auroc_before, r.auroc_after)
        << '\n';
  }
  for (const auto& c : summary.classes) {
    out << c.class_name << "\taverage\t" << render_cell(c.before, c.after) << '\n';
  }
  out << "all\taverage\t" << render_cell(summary.before, summary.after) << '\n';
  return out.str();
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& s : report.scores) {
    scores.push_back({{"image_id", s.image_id},
                      {"label", s.label},
                      {"score_before", s.before},
                      {"score_after", s.after}});
  }
  return {{"class", report.class_name},
          {"group", report.group},
          {"auroc_before", report.auroc_before},
          {"auroc_after", report.auroc_after},
          {"delta", report.delta},
          {"cell", render_cell(report.auroc_before, report.auroc_after)},
          {"scores", std::move(scores)}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.class_name = j.at("class").get<std::string>();
    r.group = j.at("group").get<std::string>();
    r.auroc_before = j.at("auroc_before").get<double>();
    r.auroc_after = j.at("auroc_after").get<double>();
    r.delta = j.at("delta").get<double>();
    if (j.contains("scores")) {
      for (const auto& s : j.at("scores")) {
        r.scores.push_back(ScorePair{s.at("image_id").get<std::string>(), s.at("label").get<int>(),
                                     s.at("score_before").get<double>(),
                                     s.at("score_after").get<double>()});
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatErrorKind::kInvalidValue, std::string("report json: ") + e.what());
  }
}

nlohmann::json to_json(const ReportSummary& summary) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : summary.classes) {
    classes.push_back({{"class", c.class_name},
                       {"groups", c.groups},
                       {"auroc_before", c.before},
                       {"auroc_after", c.after},
                       {"delta", c.delta},
                       {"cell", render_cell(c.before, c.after)}});
  }
  return {{"classes", std::move(classes)},
          {"auroc_before", summary.before},
          {"auroc_after", summary.after},
          {"delta", summary.delta},
          {"cell", render_cell(summary.before, summary.after)}};
}

}  // namespace normadd

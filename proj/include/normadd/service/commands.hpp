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

// The nand commands as library functions. The CLI in tools/ and the HTTP
// service are thin wrappers around these.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "normadd/report.hpp"
#include "normadd/service/workspace.hpp"
#include "normadd/synthetic.hpp"

namespace normadd::service {

struct IngestStats {
  std::size_t encoded = 0;      // no usable entry before
  std::size_t reused = 0;       // hash hit, file untouched
  std::size_t regenerated = 0;  // entry known but file missing
  std::size_t repaired = 0;     // file present but failing its hash
  std::size_t removed = 0;      // entries of images no longer in the dataset
  std::size_t prompts = 0;      // prompts in the cached prompt-embedding file
  std::size_t banks_dropped = 0;
};

/// Encodes every dataset image into the cache under an exclusive lock and
/// persists the manifest. Throws EncoderError naming the first image that
/// cannot be encoded; entries written before it are kept.
IngestStats cmd_ingest(const Workspace& ws);

struct EncodeStubStats {
  std::size_t images = 0;
  std::size_t prompts = 0;
};

/// Writes stub embeddings for every dataset image to <out>/<class>/<id>.naeb
/// plus <out>/prompts.naeb and <out>/prompts.txt, in the layout an external
/// encoder adapter produces, so that encoder.kind = files can read them.
EncodeStubStats cmd_encode_stub(const Workspace& ws, std::uint64_t seed,
                                const std::filesystem::path& out);

/// Builds the class's feature bank from its cached train embeddings at
/// bank.layer and records it in the manifest (exclusive lock).
BankEntry cmd_build_bank(const Workspace& ws, const std::string& class_name, double fraction);

struct GroupFailure {
  std::string class_name;
  std::string group;  // empty when the whole class failed
  std::string message;
};

struct EvalOutcome {
  std::vector<EvalReport> reports;
  std::vector<GroupFailure> failures;

  bool ok() const noexcept { return failures.empty(); }
  /// Report lines and averages, then one "error" line per failure.
  std::string render() const;
  nlohmann::json to_json() const;
};

struct EvalRequest {
  std::optional<std::string> class_name;  // nullopt: every class
  std::optional<std::string> group;       // nullopt: every group of the class
  BaseDetector detector = BaseDetector::kZeroShot;
};

/// Scenario, normality addition and before/after scoring per group. Failures
/// are collected per group (or per class) and the run continues.
EvalOutcome cmd_eval(const Session& session, const EvalRequest& request);

struct PreviewResult {
  std::string class_name;
  std::string image_id;  // class-relative
  NormalitySpec normality;
  double score_before = 0.0;
  double score_after = 0.0;
  AnomalyMap map_before;
  SuppressionMap map_sup;
  AnomalyMap map_after;

  /// Maps as base64 8-bit grayscale PNGs with their raw min and max.
  nlohmann::json to_json() const;
};

/// Throws NotFound for an unknown class or image, InvalidArgument for an
/// empty normality text.
PreviewResult cmd_preview(const Session& session, const std::string& class_name,
                          const std::string& image_id, const std::string& normality_text,
                          BaseDetector detector);
/// As above with an already built base detector.
PreviewResult cmd_preview(const Session& session, std::shared_ptr<const Detector> base,
                          const std::string& class_name, const std::string& image_id,
                          const std::string& normality_text);

/// Writes <dir>/data (synthetic dataset) and <dir>/nand.conf pointing at it
/// with the matching stub encoder settings. Returns the config path.
std::filesystem::path cmd_make_fixture(const std::filesystem::path& dir,
                                       const SyntheticWorld& world = {});

/// Finds an indexed image by class-relative id in either split.
const ImageRef& find_image(const DatasetIndex& index, const std::string& class_name,
                           const std::string& image_id);

}  // namespace normadd::service

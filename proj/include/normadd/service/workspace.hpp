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

// Resources shared by the CLI commands and the HTTP service.
//
// A Workspace is everything derived from the configuration alone: prompt
// library, group table, dataset index, projection and the source encoder
// that ingest reads from. A Session adds the validated cache on top and
// builds detectors from it. Both are immutable once constructed.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "normadd/dataset.hpp"
#include "normadd/detectors.hpp"
#include "normadd/encoder.hpp"
#include "normadd/projection.hpp"
#include "normadd/prompts.hpp"
#include "normadd/service/cache.hpp"
#include "normadd/service/config.hpp"
#include "normadd/suppression.hpp"

namespace normadd::service {

class Workspace {
 public:
  /// Throws ConfigError, NotFound or FormatError when a configured resource
  /// cannot be loaded. The dataset is indexed when dataset.root is set.
  static std::shared_ptr<const Workspace> open(Config config);

  const Config& config() const noexcept { return config_; }
  const CacheLayout& cache() const noexcept { return cache_; }
  const PromptLibrary& library() const noexcept { return library_; }
  const GroupTable& groups() const noexcept { return groups_; }
  const ProjectionSpec& projection() const noexcept { return projection_; }
  /// Throws ConfigError when no dataset is configured.
  const DatasetIndex& dataset() const;
  bool has_dataset() const noexcept { return index_.has_value(); }

  /// Encoder that ingest reads image embeddings from.
  const EncoderClient& source() const noexcept { return *source_; }
  /// Encoder for prompts that are not in the cache; may be null.
  std::shared_ptr<const EncoderClient> text_encoder() const noexcept { return text_; }
  /// Identifies the source encoder; a cache built under another
  /// fingerprint is stale.
  const std::string& fingerprint() const noexcept { return fingerprint_; }
  /// Hash of the file an image's embedding is derived from.
  std::string source_hash(const ImageRef& image) const;

  /// Phrases for a normality, from the configured generator when there is
  /// one, else the built-in fallback.
  NormalitySpec normality(const std::string& class_name, const std::string& text) const;
  /// Every prompt the detectors need for the indexed classes and groups,
  /// sorted and without duplicates.
  std::vector<std::string> known_prompts() const;

  ZeroShotOptions zero_shot_options() const;
  BankOptions bank_options(std::size_t layer) const;
  SuppressionOptions suppression_options() const;

 private:
  Workspace() = default;

  Config config_;
  CacheLayout cache_;
  PromptLibrary library_;
  GroupTable groups_;
  std::optional<DatasetIndex> index_;
  ProjectionSpec projection_;
  std::shared_ptr<const EncoderClient> source_;
  std::shared_ptr<const EncoderClient> text_;
  std::shared_ptr<const PhraseGeneratorClient> generator_;
  std::string fingerprint_;
};

/// Normality text used for an anomaly group: its name with '_' as spaces.
std::string group_normality(const AnomalyGroup& group);

class Session {
 public:
  /// Loads and checks the manifest: it must exist, match the workspace's
  /// encoder fingerprint and, when a projection is configured, its hash.
  static std::shared_ptr<const Session> open(std::shared_ptr<const Workspace> workspace);

  const Workspace& workspace() const noexcept { return *workspace_; }
  const CacheManifest& manifest() const noexcept { return *manifest_; }
  const EncoderClient& encoder() const noexcept { return *encoder_; }

  /// Throws NotFound when the class or the detector's cache entry is
  /// missing, FormatError when a bank fails its hash check.
  std::shared_ptr<const Detector> base_detector(const std::string& class_name,
                                                BaseDetector kind) const;
  std::shared_ptr<const SuppressedDetector> add(std::shared_ptr<const Detector> base,
                                                const NormalitySpec& spec) const;

 private:
  Session() = default;

  std::shared_ptr<const Workspace> workspace_;
  std::shared_ptr<const CacheManifest> manifest_;
  std::shared_ptr<const ManifestEncoder> encoder_;
};

}  // namespace normadd::service

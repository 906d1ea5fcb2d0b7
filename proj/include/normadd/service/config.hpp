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

// Runtime configuration for the nand CLI and service.
//
// The file is UTF-8 "key = value" lines; '#' starts a comment, blank lines
// are ignored, and unknown keys are rejected. Every key can be overridden by
// an environment variable named NAND_ followed by the key in upper case with
// '.' replaced by '_', e.g. NAND_BANK_FRACTION for bank.fraction. Relative
// paths in a file resolve against the file's directory; relative paths from
// the environment resolve against the working directory.
//
// Keys and defaults:
//
//   dataset.root              (required by commands that touch the dataset)
//   cache.dir                 .nand-cache
//   prompts.dir               the installed asset directory
//   groups.path               <prompts.dir>/mvtec_groups.txt
//   encoder.kind              stub | files
//   encoder.seed              0
//   encoder.layout            16x16x128,8x8x128
//   encoder.text_dim          dim of the first layer
//   encoder.plants            plant table JSON (stub only, optional)
//   encoder.embedding_dir     adapter output with <class>/<id>.naeb (files)
//   encoder.prompt_vectors    adapter prompt-embedding file (files)
//   encoder.prompt_list       prompts of that file, one per line (files)
//   projection.path           NAPJ file (optional, identity otherwise)
//   detector.kind             zs | bank | external
//   detector.layers           comma-separated layer indices, empty for all
//   detector.logit_scale      1
//   detector.map_size         256
//   detector.smoothing_sigma  0
//   bank.fraction             0.1
//   bank.layer                0
//   external.map_dir          directory of <class>/<id>.naam maps
//   suppression.size          256
//   suppression.layers        comma-separated, empty for all
//   suppression.logit_scale   1
//   phrase_generator.url      HTTP endpoint (optional)
//   phrase_generator.command  shell command (optional, used when no url)
//   eval.workers              0 (hardware concurrency)
//   service.host              127.0.0.1
//   service.port              8080

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "normadd/detectors.hpp"
#include "normadd/stub_encoder.hpp"

namespace normadd::service {

enum class EncoderKind { kStub, kFiles };
enum class BaseDetector { kZeroShot, kBank, kExternal };

std::string_view to_string(EncoderKind kind);
std::string_view to_string(BaseDetector kind);
/// Accepts "zs", "bank" and "external". Throws ConfigError.
BaseDetector parse_detector(std::string_view text);

struct Config {
  std::filesystem::path dataset_root;
  std::filesystem::path cache_dir = ".nand-cache";
  std::filesystem::path prompts_dir;
  std::filesystem::path groups_path;

  EncoderKind encoder_kind = EncoderKind::kStub;
  std::uint64_t encoder_seed = 0;
  std::vector<GridShape> encoder_layout{{16, 16, 128}, {8, 8, 128}};
  std::size_t text_dim = 128;
  std::filesystem::path plants_path;
  std::filesystem::path embedding_dir;
  std::filesystem::path prompt_vectors;
  std::filesystem::path prompt_list;
  std::filesystem::path projection_path;

  BaseDetector detector = BaseDetector::kZeroShot;
  std::vector<std::size_t> detector_layers;
  double logit_scale = 1.0;
  std::size_t map_size = 256;
  double smoothing_sigma = 0.0;
  double bank_fraction = 0.1;
  std::size_t bank_layer = 0;
  std::filesystem::path external_map_dir;

  std::size_t suppression_size = 256;
  std::vector<std::size_t> suppression_layers;
  double suppression_logit_scale = 1.0;

  std::string phrase_generator_url;
  std::string phrase_generator_command;

  std::size_t eval_workers = 0;
  std::string service_host = "127.0.0.1";
  std::uint16_t service_port = 8080;

  /// Numeric ranges and path existence. Throws ConfigError.
  void validate() const;
  /// As validate(), and additionally requires dataset.root.
  void require_dataset() const;

  /// Canonical "key = value" rendering, sorted by key.
  std::string dump() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads std::getenv.
std::optional<std::string> process_env(const std::string& name);

/// "bank.fraction" -> "NAND_BANK_FRACTION".
std::string env_name(std::string_view key);

std::vector<std::string> config_keys();

/// Defaults, then the file (when given), then environment overrides. The
/// result is validated. Throws ConfigError.
Config load_config(const std::optional<std::filesystem::path>& file,
                   const EnvLookup& env = process_env);

/// Applies one key. Throws ConfigError for unknown keys and bad values.
void set_config_value(Config& config, std::string_view key, std::string_view value,
                      const std::filesystem::path& base_dir = {});

/// The compiled-in asset directory.
std::filesystem::path default_asset_dir();

}  // namespace normadd::service

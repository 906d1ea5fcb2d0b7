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

#include "normadd/service/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "normadd/errors.hpp"

namespace fs = std::filesystem;

namespace normadd::service {

std::string_view to_string(EncoderKind kind) {
  return kind == EncoderKind::kStub ? "stub" : "files";
}

std::string_view to_string(BaseDetector kind) {
  switch (kind) {
    case BaseDetector::kZeroShot:
      return "zs";
    case BaseDetector::kBank:
      return "bank";
    case BaseDetector::kExternal:
      return "external";
  }
  return "unknown";
}

BaseDetector parse_detector(std::string_view text) {
  if (text == "zs") return BaseDetector::kZeroShot;
  if (text == "bank") return BaseDetector::kBank;
  if (text == "external") return BaseDetector::kExternal;
  throw ConfigError("unknown detector '" + std::string(text) + "' (expected zs, bank or external)");
}

fs::path default_asset_dir() { return NORMADD_DEFAULT_ASSET_DIR; }

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

std::string env_name(std::string_view key) {
  std::string out = "NAND_";
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError(std::string(key) + ": '" + std::string(value) + "' is not " +
                    std::string(want));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    bad_value(key, value, std::is_floating_point_v<T> ? "a number" : "a non-negative integer");
  }
  return out;
}

std::vector<std::size_t> parse_index_list(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : comma - start));
    if (!item.empty()) out.push_back(parse_number<std::size_t>(key, item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

fs::path resolve(std::string_view value, const fs::path& base) {
  fs::path p{std::string(value)};
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

using Setter = void (*)(Config&, std::string_view key, std::string_view value, const fs::path&);

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"dataset.root", [](Config& c, auto, auto v, const auto& b) { c.dataset_root = resolve(v, b); }},
      {"cache.dir", [](Config& c, auto, auto v, const auto& b) { c.cache_dir = resolve(v, b); }},
      {"prompts.dir", [](Config& c, auto, auto v, const auto& b) { c.prompts_dir = resolve(v, b); }},
      {"groups.path", [](Config& c, auto, auto v, const auto& b) { c.groups_path = resolve(v, b); }},
      {"encoder.kind",
       [](Config& c, auto k, auto v, const auto&) {
         if (v == "stub") {
           c.encoder_kind = EncoderKind::kStub;
         } else if (v == "files") {
           c.encoder_kind = EncoderKind::kFiles;
         } else {
           bad_value(k, v, "stub or files");
         }
       }},
      {"encoder.seed",
       [](Config& c, auto k, auto v, const auto&) { c.encoder_seed = parse_number<std::uint64_t>(k, v); }},
      {"encoder.layout",
       [](Config& c, auto k, auto v, const auto&) {
         try {
           c.encoder_layout = parse_layout(v);
         } catch (const Error&) {
           bad_value(k, v, "a layout like 16x16x128,8x8x128");
         }
       }},
      {"encoder.text_dim",
       [](Config& c, auto k, auto v, const auto&) { c.text_dim = parse_number<std::size_t>(k, v); }},
      {"encoder.plants", [](Config& c, auto, auto v, const auto& b) { c.plants_path = resolve(v, b); }},
      {"encoder.embedding_dir",
       [](Config& c, auto, auto v, const auto& b) { c.embedding_dir = resolve(v, b); }},
      {"encoder.prompt_vectors",
       [](Config& c, auto, auto v, const auto& b) { c.prompt_vectors = resolve(v, b); }},
      {"encoder.prompt_list",
       [](Config& c, auto, auto v, const auto& b) { c.prompt_list = resolve(v, b); }},
      {"projection.path",
       [](Config& c, auto, auto v, const auto& b) { c.projection_path = resolve(v, b); }},
      {"detector.kind",
       [](Config& c, auto, auto v, const auto&) { c.detector = parse_detector(v); }},
      {"detector.layers",
       [](Config& c, auto k, auto v, const auto&) { c.detector_layers = parse_index_list(k, v); }},
      {"detector.logit_scale",
       [](Config& c, auto k, auto v, const auto&) { c.logit_scale = parse_number<double>(k, v); }},
      {"detector.map_size",
       [](Config& c, auto k, auto v, const auto&) { c.map_size = parse_number<std::size_t>(k, v); }},
      {"detector.smoothing_sigma",
       [](Config& c, auto k, auto v, const auto&) { c.smoothing_sigma = parse_number<double>(k, v); }},
      {"bank.fraction",
       [](Config& c, auto k, auto v, const auto&) { c.bank_fraction = parse_number<double>(k, v); }},
      {"bank.layer",
       [](Config& c, auto k, auto v, const auto&) { c.bank_layer = parse_number<std::size_t>(k, v); }},
      {"external.map_dir",
       [](Config& c, auto, auto v, const auto& b) { c.external_map_dir = resolve(v, b); }},
      {"suppression.size",
       [](Config& c, auto k, auto v, const auto&) {
         c.suppression_size = parse_number<std::size_t>(k, v);
       }},
      {"suppression.layers",
       [](Config& c, auto k, auto v, const auto&) { c.suppression_layers = parse_index_list(k, v); }},
      {"suppression.logit_scale",
       [](Config& c, auto k, auto v, const auto&) {
         c.suppression_logit_scale = parse_number<double>(k, v);
       }},
      {"phrase_generator.url",
       [](Config& c, auto, auto v, const auto&) { c.phrase_generator_url = std::string(v); }},
      {"phrase_generator.command",
       [](Config& c, auto, auto v, const auto&) { c.phrase_generator_command = std::string(v); }},
      {"eval.workers",
       [](Config& c, auto k, auto v, const auto&) { c.eval_workers = parse_number<std::size_t>(k, v); }},
      {"service.host", [](Config& c, auto, auto v, const auto&) { c.service_host = std::string(v); }},
      {"service.port",
       [](Config& c, auto k, auto v, const auto&) {
         const auto port = parse_number<std::uint32_t>(k, v);
         if (port > 65535) bad_value(k, v, "a port number");
         c.service_port = static_cast<std::uint16_t>(port);
       }},
  };
  return table;
}

void require_dir(std::string_view key, const fs::path& p) {
  if (!fs::is_directory(p)) {
    throw ConfigError(std::string(key) + ": directory " + p.string() + " does not exist");
  }
}

void require_file(std::string_view key, const fs::path& p) {
  if (!fs::is_regular_file(p)) {
    throw ConfigError(std::string(key) + ": file " + p.string() + " does not exist");
  }
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

void set_config_value(Config& config, std::string_view key, std::string_view value,
                      const fs::path& base_dir) {
  auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second(config, key, trim(value), base_dir);
}

void Config::validate() const {
  if (cache_dir.empty()) throw ConfigError("cache.dir: must not be empty");
  if (!dataset_root.empty()) require_dir("dataset.root", dataset_root);
  require_dir("prompts.dir", prompts_dir);
  require_file("groups.path", groups_path);
  if (encoder_layout.empty()) throw ConfigError("encoder.layout: must list at least one layer");
  if (text_dim == 0) throw ConfigError("encoder.text_dim: must be positive");
  if (!plants_path.empty()) require_file("encoder.plants", plants_path);
  if (!projection_path.empty()) require_file("projection.path", projection_path);
  if (encoder_kind == EncoderKind::kFiles) {
    if (embedding_dir.empty()) throw ConfigError("encoder.embedding_dir: required for files");
    require_dir("encoder.embedding_dir", embedding_dir);
  }
  if (prompt_vectors.empty() != prompt_list.empty()) {
    throw ConfigError("encoder.prompt_vectors and encoder.prompt_list go together");
  }
  if (!prompt_vectors.empty()) {
    require_file("encoder.prompt_vectors", prompt_vectors);
    require_file("encoder.prompt_list", prompt_list);
  }
  if (detector == BaseDetector::kExternal) {
    if (external_map_dir.empty()) throw ConfigError("external.map_dir: required for external");
    require_dir("external.map_dir", external_map_dir);
  }
  if (!(bank_fraction > 0.0 && bank_fraction <= 1.0)) {
    throw ConfigError("bank.fraction: must be in (0, 1], got " + std::to_string(bank_fraction));
  }
  if (!(smoothing_sigma >= 0.0) || !std::isfinite(smoothing_sigma)) {
    throw ConfigError("detector.smoothing_sigma: must be >= 0");
  }
  for (auto [key, v] : {std::pair{"detector.logit_scale", logit_scale},
                        std::pair{"suppression.logit_scale", suppression_logit_scale}}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + ": must be > 0");
  }
  if (map_size == 0) throw ConfigError("detector.map_size: must be positive");
  if (suppression_size == 0) throw ConfigError("suppression.size: must be positive");
}

void Config::require_dataset() const {
  if (dataset_root.empty()) throw ConfigError("dataset.root: not set");
  validate();
}

std::string Config::dump() const {
  std::map<std::string, std::string> kv = {
      {"dataset.root", dataset_root.string()},
      {"cache.dir", cache_dir.string()},
      {"prompts.dir", prompts_dir.string()},
      {"groups.path", groups_path.string()},
      {"encoder.kind", std::string(to_string(encoder_kind))},
      {"encoder.seed", std::to_string(encoder_seed)},
      {"encoder.layout", format_layout(encoder_layout)},
      {"encoder.text_dim", std::to_string(text_dim)},
      {"encoder.plants", plants_path.string()},
      {"encoder.embedding_dir", embedding_dir.string()},
      {"encoder.prompt_vectors", prompt_vectors.string()},
      {"encoder.prompt_list", prompt_list.string()},
      {"projection.path", projection_path.string()},
      {"detector.kind", std::string(to_string(detector))},
      {"detector.layers", join(detector_layers)},
      {"detector.logit_scale", (std::ostringstream{} << logit_scale).str()},
      {"detector.map_size", std::to_string(map_size)},
      {"detector.smoothing_sigma", (std::ostringstream{} << smoothing_sigma).str()},
      {"bank.fraction", (std::ostringstream{} << bank_fraction).str()},
      {"bank.layer", std::to_string(bank_layer)},
      {"external.map_dir", external_map_dir.string()},
      {"suppression.size", std::to_string(suppression_size)},
      {"suppression.layers", join(suppression_layers)},
      {"suppression.logit_scale", (std::ostringstream{} << suppression_logit_scale).str()},
      {"phrase_generator.url", phrase_generator_url},
      {"phrase_generator.command", phrase_generator_command},
      {"eval.workers", std::to_string(eval_workers)},
      {"service.host", service_host},
      {"service.port", std::to_string(service_port)},
  };
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

Config load_config(const std::optional<fs::path>& file, const EnvLookup& env) {
  Config config;
  config.prompts_dir = default_asset_dir();
  std::set<std::string, std::less<>> seen;

  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot open config file " + file->string());
    const auto base = file->parent_path().empty() ? fs::path(".") : file->parent_path();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      const auto body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(file->string() + ":" + std::to_string(lineno) + ": expected key = value");
      }
      const auto key = trim(body.substr(0, eq));
      try {
        set_config_value(config, key, body.substr(eq + 1), base);
      } catch (const ConfigError& e) {
        throw ConfigError(file->string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
      seen.emplace(key);
    }
  }
  for (const auto& key : config_keys()) {
    if (auto v = env(env_name(key))) {
      set_config_value(config, key, *v);
      seen.insert(key);
    }
  }
  if (!seen.count("groups.path")) config.groups_path = config.prompts_dir / "mvtec_groups.txt";
  if (!seen.count("encoder.text_dim")) config.text_dim = config.encoder_layout.front().dim;
  config.validate();
  return config;
}

}  // namespace normadd::service

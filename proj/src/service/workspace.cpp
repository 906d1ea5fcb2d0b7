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

#include "normadd/service/workspace.hpp"

#include <algorithm>
#include <set>

#include "normadd/errors.hpp"
#include "normadd/feature_bank.hpp"
#include "normadd/phrase_generator.hpp"
#include "normadd/synthetic.hpp"

namespace fs = std::filesystem;

namespace normadd::service {

std::shared_ptr<const Workspace> Workspace::open(Config config) {
  config.validate();
  std::shared_ptr<Workspace> ws(new Workspace());
  ws->cache_ = CacheLayout{config.cache_dir};
  ws->library_ = PromptLibrary::load(config.prompts_dir);
  ws->groups_ = GroupTable::load(config.groups_path);
  if (!config.dataset_root.empty()) ws->index_ = index_dataset(config.dataset_root, ws->groups_);
  if (!config.projection_path.empty()) {
    ws->projection_ = read_projection_file(config.projection_path);
  }

  if (config.encoder_kind == EncoderKind::kStub) {
    auto text = std::make_shared<StubEncoder>(
        StubEncoderConfig{config.encoder_seed, config.encoder_layout, config.text_dim, {}});
    std::string plants = "none";
    PlantResolver resolver;
    if (!config.plants_path.empty()) {
      plants = hash_file(config.plants_path);
      resolver = make_plant_resolver(PlantTable::load(config.plants_path), ws->library_, *text);
    }
    ws->source_ = std::make_shared<StubEncoder>(StubEncoderConfig{
        config.encoder_seed, config.encoder_layout, config.text_dim, std::move(resolver)});
    ws->text_ = text;
    ws->fingerprint_ = "stub seed=" + std::to_string(config.encoder_seed) +
                       " layout=" + format_layout(config.encoder_layout) +
                       " text_dim=" + std::to_string(config.text_dim) + " plants=" + plants;
  } else {
    auto files = std::make_shared<FileCacheEncoder>(config.embedding_dir);
    std::string prompts = "none";
    if (!config.prompt_vectors.empty()) {
      files->load_prompt_embeddings(config.prompt_vectors, config.prompt_list);
      prompts = hash_file(config.prompt_vectors) + "/" + hash_file(config.prompt_list);
    }
    ws->source_ = files;
    ws->text_ = files;
    ws->fingerprint_ =
        "files dir=" + fs::absolute(config.embedding_dir).lexically_normal().string() +
        " prompts=" + prompts;
  }

  if (!config.phrase_generator_url.empty()) {
    ws->generator_ = std::make_shared<HttpPhraseGenerator>(config.phrase_generator_url);
  } else if (!config.phrase_generator_command.empty()) {
    ws->generator_ = std::make_shared<SubprocessPhraseGenerator>(config.phrase_generator_command);
  }
  ws->config_ = std::move(config);
  return ws;
}

const DatasetIndex& Workspace::dataset() const {
  if (!index_) throw ConfigError("dataset.root: not set");
  return *index_;
}

std::string Workspace::source_hash(const ImageRef& image) const {
  if (config_.encoder_kind == EncoderKind::kFiles) {
    return hash_file(FileCacheEncoder::image_path(config_.embedding_dir, image.key()));
  }
  return hash_file(image.path);
}

NormalitySpec Workspace::normality(const std::string& class_name, const std::string& text) const {
  return generate_phrases(NormalitySpec{class_name, text, {}}, generator_.get());
}

std::vector<std::string> Workspace::known_prompts() const {
  std::set<std::string> out;
  auto add = [&](const PromptSet& p) { out.insert(p.rendered.begin(), p.rendered.end()); };
  for (const auto& ci : dataset().classes) {
    add(library_.normal_prompts(ci.name));
    add(library_.abnormal_prompts(ci.name));
    for (const auto& g : ci.groups) add(library_.addition_prompts(normality(ci.name, group_normality(g))));
  }
  return {out.begin(), out.end()};
}

ZeroShotOptions Workspace::zero_shot_options() const {
  return ZeroShotOptions{{config_.map_size, config_.map_size},
                         config_.detector_layers,
                         config_.logit_scale,
                         config_.smoothing_sigma};
}

BankOptions Workspace::bank_options(std::size_t layer) const {
  return BankOptions{{config_.map_size, config_.map_size}, layer, config_.smoothing_sigma};
}

SuppressionOptions Workspace::suppression_options() const {
  return SuppressionOptions{{config_.suppression_size, config_.suppression_size},
                            config_.suppression_layers,
                            config_.suppression_logit_scale};
}

std::string group_normality(const AnomalyGroup& group) { return display_name(group.name); }

std::shared_ptr<const Session> Session::open(std::shared_ptr<const Workspace> workspace) {
  std::shared_ptr<Session> s(new Session());
  const auto& layout = workspace->cache();
  auto manifest = std::make_shared<const CacheManifest>(CacheManifest::load(layout));
  if (manifest->encoder != workspace->fingerprint()) {
    throw ProtocolError("cache " + layout.root.string() +
                        " was built by a different encoder (run ingest)");
  }
  const auto& proj = workspace->config().projection_path;
  if (!proj.empty()) {
    if (!manifest->projection || manifest->projection->hash != hash_file(proj)) {
      throw ProtocolError("projection " + proj.string() +
                          " changed since the cache was built (run ingest)");
    }
  }
  s->encoder_ = std::make_shared<const ManifestEncoder>(layout, manifest, workspace->text_encoder());
  s->manifest_ = std::move(manifest);
  s->workspace_ = std::move(workspace);
  return s;
}

std::shared_ptr<const Detector> Session::base_detector(const std::string& class_name,
                                                       BaseDetector kind) const {
  const auto& ws = *workspace_;
  const auto& ci = ws.dataset().get(class_name);
  switch (kind) {
    case BaseDetector::kZeroShot:
      return std::make_shared<const ZeroShotDetector>(
          encode_prompt_set(ws.library().normal_prompts(ci.name), *encoder_, FeatureRole::kNormal),
          encode_prompt_set(ws.library().abnormal_prompts(ci.name), *encoder_,
                            FeatureRole::kAbnormal),
          ws.projection(), ws.zero_shot_options());
    case BaseDetector::kBank: {
      auto it = manifest_->banks.find(ci.name);
      if (it == manifest_->banks.end()) {
        throw NotFound("no feature bank for class '" + ci.name + "' (run build-bank)");
      }
      verify_entry(ws.cache(), it->second.file);
      auto bank = std::make_shared<const FeatureBank>(
          read_bank_file(ws.cache().root / it->second.file.path));
      return std::make_shared<const FeatureBankDetector>(std::move(bank),
                                                         ws.bank_options(it->second.layer));
    }
    case BaseDetector::kExternal:
      if (ws.config().external_map_dir.empty()) {
        throw NotFound("external.map_dir is not configured");
      }
      return std::make_shared<const ExternalMapDetector>(ws.config().external_map_dir);
  }
  throw InvalidArgument("unknown detector kind");
}

std::shared_ptr<const SuppressedDetector> Session::add(std::shared_ptr<const Detector> base,
                                                       const NormalitySpec& spec) const {
  const auto& ws = *workspace_;
  return add_normality(std::move(base), spec, *encoder_, ws.projection(), ws.library(),
                       ws.suppression_options());
}

}  // namespace normadd::service

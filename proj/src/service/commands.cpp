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

#include "normadd/service/commands.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <set>

#include "binary_io.hpp"
#include "httplib.h"
#include "normadd/embedding_file.hpp"
#include "normadd/errors.hpp"
#include "normadd/feature_bank.hpp"
#include "normadd/png.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace normadd::service {

namespace {

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::vector<const ImageRef*> all_images(const DatasetIndex& index) {
  std::vector<const ImageRef*> out;
  for (const auto& ci : index.classes) {
    for (const auto& img : ci.train_normal) out.push_back(&img);
    for (const auto& img : ci.test) out.push_back(&img);
  }
  return out;
}

bool file_matches(const CacheLayout& layout, const std::optional<FileEntry>& entry,
                  const std::string& hash) {
  return entry && entry->hash == hash && fs::exists(layout.root / entry->path) &&
         hash_file(layout.root / entry->path) == hash;
}

// Writes the prompt-embedding pair for the prompts the encoder can resolve.
std::size_t write_prompt_cache(const Workspace& ws, const CacheManifest& old, CacheManifest& next) {
  const auto& layout = ws.cache();
  std::vector<Embedding> vectors;
  std::string list;
  std::size_t skipped = 0;
  for (const auto& p : ws.known_prompts()) {
    try {
      vectors.push_back(ws.text_encoder()->encode_text(p));
    } catch (const EncoderError&) {
      ++skipped;
      continue;
    }
    list += p + "\n";
  }
  if (skipped > 0) {
    spdlog::warn("{} prompt(s) could not be encoded and are left out of the prompt cache",
                 skipped);
  }
  if (vectors.empty()) return 0;
  const auto naeb = encode_embedding_file(pack_vectors("prompts", vectors));
  const auto vec_hash = hash_bytes(naeb);
  const auto list_hash = hash_bytes(as_bytes(list));
  if (!file_matches(layout, old.prompt_vectors, vec_hash)) {
    detail::write_file_atomic(layout.prompt_vectors(), naeb);
  }
  if (!file_matches(layout, old.prompt_list, list_hash)) {
    detail::write_file_atomic(layout.prompt_list(), as_bytes(list));
  }
  next.prompt_vectors = FileEntry{layout.prompt_vectors().filename().string(), vec_hash};
  next.prompt_list = FileEntry{layout.prompt_list().filename().string(), list_hash};
  return vectors.size();
}

}  // namespace

IngestStats cmd_ingest(const Workspace& ws) {
  const auto& layout = ws.cache();
  const auto& index = ws.dataset();
  auto lock = CacheLock::acquire(layout, LockMode::kExclusive);

  CacheManifest old;
  try {
    old = CacheManifest::load(layout);
  } catch (const NotFound&) {
  } catch (const FormatError& e) {
    spdlog::warn("discarding unreadable manifest: {}", e.what());
  }
  const bool same_encoder = old.encoder == ws.fingerprint();
  if (!old.encoder.empty() && !same_encoder) {
    spdlog::warn("encoder settings changed since the last ingest; re-encoding every image");
  }

  CacheManifest next;
  next.encoder = ws.fingerprint();
  IngestStats stats;
  std::set<std::string> changed_classes;

  auto persist_partial = [&] {
    try {
      next.save(layout);
    } catch (const Error& e) {
      spdlog::error("could not save partial manifest: {}", e.what());
    }
  };

  for (const ImageRef* img : all_images(index)) {
    const auto key = img->key();
    const auto rel = "embeddings/" + key + ".naeb";
    const auto path = layout.root / rel;
    std::string source_hash;
    try {
      source_hash = ws.source_hash(*img);
    } catch (const NotFound& e) {
      persist_partial();
      throw EncoderError("cannot encode image '" + key + "': " + e.what());
    }

    auto it = old.images.find(key);
    const bool known = same_encoder && it != old.images.end() &&
                       it->second.source_hash == source_hash && it->second.embedding.path == rel;
    if (known) {
      if (!fs::exists(path)) {
        ++stats.regenerated;
      } else if (hash_file(path) == it->second.embedding.hash) {
        ++stats.reused;
        next.images.emplace(key, it->second);
        continue;
      } else {
        spdlog::warn("cached embedding {} fails its hash check; rebuilding", rel);
        ++stats.repaired;
      }
    } else {
      ++stats.encoded;
    }

    std::vector<std::uint8_t> bytes;
    try {
      bytes = encode_embedding_file(ws.source().encode_image(key));
      fs::create_directories(path.parent_path());
      detail::write_file_atomic(path, bytes);
    } catch (const Error& e) {
      persist_partial();
      throw EncoderError("cannot encode image '" + key + "': " + e.what());
    }
    next.images.emplace(key, ImageEntry{FileEntry{rel, hash_bytes(bytes)}, source_hash});
    if (img->id.rfind("train/", 0) == 0) changed_classes.insert(img->class_name);
  }

  for (const auto& [key, entry] : old.images) {
    if (next.images.count(key)) continue;
    std::error_code ec;
    fs::remove(layout.root / entry.embedding.path, ec);
    ++stats.removed;
  }

  for (const auto& [cls, bank] : old.banks) {
    bool keep = same_encoder && !changed_classes.count(cls);
    if (keep) {
      try {
        index.get(cls);
        verify_entry(layout, bank.file);
      } catch (const Error&) {
        keep = false;
      }
    }
    if (keep) {
      next.banks.emplace(cls, bank);
    } else {
      spdlog::warn("feature bank of class '{}' is stale and was dropped (run build-bank)", cls);
      ++stats.banks_dropped;
    }
  }

  stats.prompts = write_prompt_cache(ws, old, next);
  if (!ws.config().projection_path.empty()) {
    next.projection = FileEntry{fs::absolute(ws.config().projection_path).string(),
                                hash_file(ws.config().projection_path)};
  }
  next.save(layout);
  return stats;
}

EncodeStubStats cmd_encode_stub(const Workspace& ws, std::uint64_t seed, const fs::path& out) {
  const auto& cfg = ws.config();
  const StubEncoder enc(StubEncoderConfig{seed, cfg.encoder_layout, cfg.text_dim, {}});
  EncodeStubStats stats;
  for (const ImageRef* img : all_images(ws.dataset())) {
    const auto path = FileCacheEncoder::image_path(out, img->key());
    fs::create_directories(path.parent_path());
    write_embedding_file(enc.encode_image(img->key()), path);
    ++stats.images;
  }
  std::vector<Embedding> vectors;
  std::string list;
  for (const auto& p : ws.known_prompts()) {
    vectors.push_back(enc.encode_text(p));
    list += p + "\n";
  }
  fs::create_directories(out);
  write_embedding_file(pack_vectors("prompts", vectors), out / "prompts.naeb");
  detail::write_file_atomic(out / "prompts.txt", as_bytes(list));
  stats.prompts = vectors.size();
  return stats;
}

BankEntry cmd_build_bank(const Workspace& ws, const std::string& class_name, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("bank fraction must be in (0, 1], got " + std::to_string(fraction));
  }
  const auto& layout = ws.cache();
  auto lock = CacheLock::acquire(layout, LockMode::kExclusive);
  auto manifest = std::make_shared<CacheManifest>(CacheManifest::load(layout));
  if (manifest->encoder != ws.fingerprint()) {
    throw ProtocolError("cache was built by a different encoder (run ingest)");
  }
  const auto& ci = ws.dataset().get(class_name);
  if (ci.train_normal.empty()) {
    throw ProtocolError("class '" + ci.name + "' has no train/good images for a feature bank");
  }
  const std::size_t layer = ws.config().bank_layer;
  const ManifestEncoder enc(layout, manifest, nullptr);
  std::vector<Embedding> patches;
  for (const auto& img : ci.train_normal) {
    const auto set = enc.encode_image(img.key());
    if (layer >= set.layers.size()) {
      throw ConfigError("bank.layer " + std::to_string(layer) + " out of range for '" +
                        img.key() + "'");
    }
    const auto& grid = set.layers[layer];
    for (std::size_t p = 0; p < grid.patch_count(); ++p) {
      const auto v = grid.patch(p);
      patches.emplace_back(std::vector<float>(v.begin(), v.end()));
    }
  }
  const auto bank = build_bank(patches, fraction);
  const auto bytes = encode_bank_file(bank);
  const auto path = layout.bank(ci.name);
  fs::create_directories(path.parent_path());
  detail::write_file_atomic(path, bytes);
  BankEntry entry{FileEntry{fs::relative(path, layout.root).generic_string(), hash_bytes(bytes)},
                  fraction, layer, bank.source_count()};
  manifest->banks[ci.name] = entry;
  manifest->save(layout);
  return entry;
}

std::string EvalOutcome::render() const {
  std::string out;
  if (!reports.empty()) out = render_text(reports, aggregate_report(reports));
  for (const auto& f : failures) {
    out += "error\t" + f.class_name + "\t" + (f.group.empty() ? "-" : f.group) + "\t" +
           f.message + "\n";
  }
  return out;
}

json EvalOutcome::to_json() const {
  json j{{"reports", json::array()}, {"summary", nullptr}, {"errors", json::array()}};
  for (const auto& r : reports) j["reports"].push_back(normadd::to_json(r));
  if (!reports.empty()) j["summary"] = normadd::to_json(aggregate_report(reports));
  for (const auto& f : failures) {
    j["errors"].push_back({{"class", f.class_name}, {"group", f.group}, {"message", f.message}});
  }
  return j;
}

EvalOutcome cmd_eval(const Session& session, const EvalRequest& request) {
  const auto& ws = session.workspace();
  const auto& index = ws.dataset();
  EvalOutcome out;
  const auto classes =
      request.class_name ? std::vector<std::string>{*request.class_name} : index.class_names();
  for (const auto& cls : classes) {
    std::vector<AnomalyGroup> groups;
    std::shared_ptr<const Detector> base;
    try {
      const auto& ci = index.get(cls);
      if (request.group) {
        groups.push_back(ci.group(*request.group));
      } else {
        groups = ci.groups;
      }
      if (groups.empty()) throw ProtocolError("class '" + cls + "' has no anomaly groups");
      base = session.base_detector(cls, request.detector);
    } catch (const Error& e) {
      out.failures.push_back({cls, request.group.value_or(""), e.what()});
      continue;
    }
    for (const auto& g : groups) {
      try {
        const auto scenario = build_scenario(index, cls, g.name);
        const auto suppressed = session.add(base, ws.normality(cls, group_normality(g)));
        out.reports.push_back(run_before_after(*base, *suppressed, scenario, session.encoder(),
                                               ws.config().eval_workers));
      } catch (const Error& e) {
        out.failures.push_back({cls, g.name, e.what()});
      }
    }
  }
  return out;
}

const ImageRef& find_image(const DatasetIndex& index, const std::string& class_name,
                           const std::string& image_id) {
  const ClassIndex* ci = nullptr;
  try {
    ci = &index.get(class_name);
  } catch (const ProtocolError& e) {
    throw NotFound(e.what());
  }
  for (const auto* split : {&ci->test, &ci->train_normal}) {
    for (const auto& img : *split) {
      if (img.id == image_id) return img;
    }
  }
  throw NotFound("class '" + class_name + "' has no image '" + image_id + "'");
}

namespace {

json map_json(const ScoreGrid& grid) {
  const auto q = quantize_map(grid);
  const auto png = encode_png(q.image);
  return json{{"format", "png"},
              {"width", q.image.width},
              {"height", q.image.height},
              {"min", q.min},
              {"max", q.max},
              {"data", httplib::detail::base64_encode(std::string(png.begin(), png.end()))}};
}

}  // namespace

json PreviewResult::to_json() const {
  return json{{"class", class_name},
              {"image_id", image_id},
              {"normality_text", normality.normality_text},
              {"phrases", normality.phrases},
              {"score_before", score_before},
              {"score_after", score_after},
              {"map_before", map_json(map_before.grid)},
              {"map_sup", map_json(map_sup.grid)},
              {"map_after", map_json(map_after.grid)}};
}

PreviewResult cmd_preview(const Session& session, const std::string& class_name,
                          const std::string& image_id, const std::string& normality_text,
                          BaseDetector detector) {
  find_image(session.workspace().dataset(), class_name, image_id);
  return cmd_preview(session, session.base_detector(class_name, detector), class_name, image_id,
                     normality_text);
}

PreviewResult cmd_preview(const Session& session, std::shared_ptr<const Detector> base,
                          const std::string& class_name, const std::string& image_id,
                          const std::string& normality_text) {
  const auto& ws = session.workspace();
  if (normality_text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw InvalidArgument("normality text is empty");
  }
  const auto& img = find_image(ws.dataset(), class_name, image_id);
  PreviewResult r;
  r.class_name = class_name;
  r.image_id = image_id;
  r.normality = ws.normality(class_name, normality_text);
  const auto suppressed = session.add(base, r.normality);
  const auto set = session.encoder().encode_image(img.key());
  r.map_before = base->score(set);
  r.map_sup = suppressed->suppression_for(set);
  r.map_after = apply_suppression(r.map_before, r.map_sup);
  r.score_before = score_from_map(r.map_before);
  r.score_after = score_from_map(r.map_after);
  return r;
}

fs::path cmd_make_fixture(const fs::path& dir, const SyntheticWorld& world) {
  const auto data = dir / "data";
  write_synthetic_dataset(world, data);
  const auto conf = dir / "nand.conf";
  std::string text =
      "# Synthetic fixture: one class, two planted anomaly groups.\n"
      "dataset.root = data\n"
      "cache.dir = cache\n"
      "groups.path = data/groups.txt\n"
      "encoder.kind = stub\n"
      "encoder.seed = " + std::to_string(world.seed) + "\n"
      "encoder.layout = " + format_layout(world.layout) + "\n"
      "encoder.plants = data/plants.json\n";
  detail::write_file_atomic(conf, as_bytes(text));
  return conf;
}

}  // namespace normadd::service

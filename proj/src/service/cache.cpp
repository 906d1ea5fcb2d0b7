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

#include "normadd/service/cache.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <thread>

#include "binary_io.hpp"
#include "normadd/embedding_file.hpp"
#include "normadd/errors.hpp"
#include "normadd/stub_encoder.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace normadd::service {

namespace {

constexpr int kManifestVersion = 1;

json entry_json(const FileEntry& e) { return json{{"path", e.path}, {"hash", e.hash}}; }

FileEntry entry_from(const json& j) {
  return FileEntry{j.at("path").get<std::string>(), j.at("hash").get<std::string>()};
}

}  // namespace

std::string hash_bytes(std::span<const std::uint8_t> bytes) {
  const auto h = fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                          bytes.size()));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string hash_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw NotFound("missing file " + path.string());
  return hash_bytes(detail::read_file_bytes(path));
}

fs::path CacheLayout::bank(std::string_view class_name) const {
  return root / "banks" / (std::string(class_name) + ".nafb");
}

json CacheManifest::to_json() const {
  json images_j = json::object();
  for (const auto& [key, e] : images) {
    images_j[key] = json{{"embedding", entry_json(e.embedding)}, {"source_hash", e.source_hash}};
  }
  json banks_j = json::object();
  for (const auto& [cls, b] : banks) {
    banks_j[cls] = json{{"file", entry_json(b.file)},
                        {"fraction", b.fraction},
                        {"layer", b.layer},
                        {"source_count", b.source_count}};
  }
  json j{{"version", kManifestVersion}, {"encoder", encoder}, {"images", images_j},
         {"banks", banks_j}};
  if (prompt_vectors) j["prompt_vectors"] = entry_json(*prompt_vectors);
  if (prompt_list) j["prompt_list"] = entry_json(*prompt_list);
  if (projection) j["projection"] = entry_json(*projection);
  return j;
}

CacheManifest CacheManifest::from_json(const json& j) {
  try {
    if (j.at("version").get<int>() != kManifestVersion) {
      throw FormatError(FormatErrorKind::kVersionMismatch, "unsupported manifest version");
    }
    CacheManifest m;
    m.encoder = j.at("encoder").get<std::string>();
    for (const auto& [key, e] : j.at("images").items()) {
      m.images.emplace(key, ImageEntry{entry_from(e.at("embedding")),
                                       e.at("source_hash").get<std::string>()});
    }
    for (const auto& [cls, b] : j.at("banks").items()) {
      m.banks.emplace(cls, BankEntry{entry_from(b.at("file")), b.at("fraction").get<double>(),
                                     b.at("layer").get<std::size_t>(),
                                     b.at("source_count").get<std::size_t>()});
    }
    if (j.contains("prompt_vectors")) m.prompt_vectors = entry_from(j["prompt_vectors"]);
    if (j.contains("prompt_list")) m.prompt_list = entry_from(j["prompt_list"]);
    if (j.contains("projection")) m.projection = entry_from(j["projection"]);
    return m;
  } catch (const json::exception& e) {
    throw FormatError(FormatErrorKind::kInvalidValue, std::string("manifest: ") + e.what());
  }
}

CacheManifest CacheManifest::load(const CacheLayout& layout) {
  if (!fs::exists(layout.manifest())) {
    throw NotFound("no cache manifest at " + layout.manifest().string() + " (run ingest)");
  }
  const auto bytes = detail::read_file_bytes(layout.manifest());
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) {
    throw FormatError(FormatErrorKind::kInvalidValue,
                      "manifest " + layout.manifest().string() + " is not valid JSON");
  }
  return from_json(j);
}

void CacheManifest::save(const CacheLayout& layout) const {
  const auto text = to_json().dump(2) + "\n";
  detail::write_file_atomic(layout.manifest(),
                            {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void verify_entry(const CacheLayout& layout, const FileEntry& entry) {
  const auto actual = hash_file(layout.root / entry.path);
  if (actual != entry.hash) {
    throw FormatError(FormatErrorKind::kInvalidValue,
                      "hash mismatch for cached " + entry.path + " (recorded " + entry.hash +
                          ", found " + actual + ")");
  }
}

// ---- lock ----------------------------------------------------------------------

std::optional<CacheLock> CacheLock::try_acquire(const CacheLayout& layout, LockMode mode) {
  fs::create_directories(layout.root);
  const int fd = ::open(layout.lock_file().c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error("cannot open lock file " + layout.lock_file().string() + ": " +
                std::strerror(errno));
  }
  const int op = (mode == LockMode::kExclusive ? LOCK_EX : LOCK_SH) | LOCK_NB;
  if (::flock(fd, op) != 0) {
    const int err = errno;
    ::close(fd);
    if (err == EWOULDBLOCK) return std::nullopt;
    throw Error("flock failed on " + layout.lock_file().string() + ": " + std::strerror(err));
  }
  return CacheLock(fd, mode);
}

CacheLock CacheLock::acquire(const CacheLayout& layout, LockMode mode,
                             std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto lock = try_acquire(layout, mode)) return std::move(*lock);
    if (std::chrono::steady_clock::now() >= deadline) {
      throw Error("cache " + layout.root.string() + " is locked by another process");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

CacheLock::CacheLock(CacheLock&& other) noexcept : fd_(other.fd_), mode_(other.mode_) {
  other.fd_ = -1;
}

CacheLock& CacheLock::operator=(CacheLock&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    mode_ = other.mode_;
    other.fd_ = -1;
  }
  return *this;
}

CacheLock::~CacheLock() {
  if (fd_ >= 0) ::close(fd_);  // closing the descriptor drops the flock
}

// ---- encoder -------------------------------------------------------------------

ManifestEncoder::ManifestEncoder(CacheLayout layout,
                                 std::shared_ptr<const CacheManifest> manifest,
                                 std::shared_ptr<const EncoderClient> text_fallback)
    : layout_(std::move(layout)),
      manifest_(std::move(manifest)),
      text_(std::make_unique<FileCacheEncoder>(layout_.embeddings(), std::move(text_fallback))) {
  if (manifest_->prompt_vectors && manifest_->prompt_list) {
    verify_entry(layout_, *manifest_->prompt_vectors);
    verify_entry(layout_, *manifest_->prompt_list);
    text_->load_prompt_embeddings(layout_.root / manifest_->prompt_vectors->path,
                                  layout_.root / manifest_->prompt_list->path);
  }
}

PatchGridSet ManifestEncoder::encode_image(std::string_view image_id) const {
  auto it = manifest_->images.find(std::string(image_id));
  if (it == manifest_->images.end()) {
    throw EncoderError("image '" + std::string(image_id) + "' is not in the cache (run ingest)");
  }
  const auto& entry = it->second.embedding;
  std::vector<std::uint8_t> bytes;
  try {
    bytes = detail::read_file_bytes(layout_.root / entry.path);
  } catch (const Error& e) {
    throw EncoderError("cached embedding for '" + std::string(image_id) + "': " + e.what());
  }
  if (hash_bytes(bytes) != entry.hash) {
    throw EncoderError("cached embedding for '" + std::string(image_id) +
                       "' fails its hash check (run ingest)");
  }
  auto set = decode_embedding_file(bytes);
  if (set.image_id != image_id) {
    throw EncoderError("cached embedding " + entry.path + " belongs to '" + set.image_id + "'");
  }
  return set;
}

Embedding ManifestEncoder::encode_text(std::string_view prompt) const {
  return text_->encode_text(prompt);
}

}  // namespace normadd::service

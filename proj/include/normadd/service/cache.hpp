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

// On-disk cache shared by the CLI commands and the service.
//
//   <cache>/manifest.json
//   <cache>/.lock
//   <cache>/embeddings/<class>/<split>/<type>/<stem>.naeb
//   <cache>/banks/<class>.nafb
//   <cache>/prompts.naeb, <cache>/prompts.txt   (prompt-embedding file pair)
//
// Every file recorded in the manifest carries the FNV-1a 64 hash of its
// bytes as 16 lower-case hex digits. Writers (ingest, build-bank) hold the
// lock exclusively; readers (eval, preview, serve) hold it shared.

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"
#include "normadd/encoder.hpp"

namespace normadd::service {

std::string hash_bytes(std::span<const std::uint8_t> bytes);
/// Throws NotFound when the file cannot be read.
std::string hash_file(const std::filesystem::path& path);

struct CacheLayout {
  std::filesystem::path root;

  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path lock_file() const { return root / ".lock"; }
  std::filesystem::path embeddings() const { return root / "embeddings"; }
  std::filesystem::path bank(std::string_view class_name) const;
  std::filesystem::path prompt_vectors() const { return root / "prompts.naeb"; }
  std::filesystem::path prompt_list() const { return root / "prompts.txt"; }
};

struct FileEntry {
  std::string path;  // relative to the cache root
  std::string hash;

  friend bool operator==(const FileEntry&, const FileEntry&) = default;
};

struct ImageEntry {
  FileEntry embedding;
  std::string source_hash;  // hash of the image file the embedding came from

  friend bool operator==(const ImageEntry&, const ImageEntry&) = default;
};

struct BankEntry {
  FileEntry file;
  double fraction = 1.0;
  std::size_t layer = 0;
  std::size_t source_count = 0;

  friend bool operator==(const BankEntry&, const BankEntry&) = default;
};

struct CacheManifest {
  std::string encoder;  // fingerprint of the encoder that produced the entries
  std::map<std::string, ImageEntry> images;  // key: "<class>/<id>"
  std::map<std::string, BankEntry> banks;    // key: class
  std::optional<FileEntry> prompt_vectors;
  std::optional<FileEntry> prompt_list;
  std::optional<FileEntry> projection;       // absolute path, hash at ingest

  nlohmann::json to_json() const;
  static CacheManifest from_json(const nlohmann::json& j);
  /// Throws NotFound when there is no manifest, FormatError when it is invalid.
  static CacheManifest load(const CacheLayout& layout);
  void save(const CacheLayout& layout) const;

  friend bool operator==(const CacheManifest&, const CacheManifest&) = default;
};

/// Throws FormatError (kInvalidValue) naming the entry when the file's hash
/// differs from the recorded one, NotFound when the file is gone.
void verify_entry(const CacheLayout& layout, const FileEntry& entry);

enum class LockMode { kShared, kExclusive };

/// flock(2) on the cache lock file. Move-only; released on destruction.
class CacheLock {
 public:
  /// Polls until the lock is granted or `timeout` passes, then throws Error.
  static CacheLock acquire(const CacheLayout& layout, LockMode mode,
                           std::chrono::milliseconds timeout = std::chrono::seconds(30));
  static std::optional<CacheLock> try_acquire(const CacheLayout& layout, LockMode mode);

  CacheLock(CacheLock&& other) noexcept;
  CacheLock& operator=(CacheLock&& other) noexcept;
  CacheLock(const CacheLock&) = delete;
  CacheLock& operator=(const CacheLock&) = delete;
  ~CacheLock();

  LockMode mode() const noexcept { return mode_; }

 private:
  CacheLock(int fd, LockMode mode) : fd_(fd), mode_(mode) {}
  int fd_ = -1;
  LockMode mode_ = LockMode::kShared;
};

/// Serves image embeddings from the manifest, verifying each file's hash as
/// it is read. Text comes from the cached prompt-embedding pair when present,
/// else from `text_fallback`.
class ManifestEncoder final : public EncoderClient {
 public:
  ManifestEncoder(CacheLayout layout, std::shared_ptr<const CacheManifest> manifest,
                  std::shared_ptr<const EncoderClient> text_fallback);

  PatchGridSet encode_image(std::string_view image_id) const override;
  Embedding encode_text(std::string_view prompt) const override;

 private:
  CacheLayout layout_;
  std::shared_ptr<const CacheManifest> manifest_;
  std::unique_ptr<FileCacheEncoder> text_;
};

}  // namespace normadd::service

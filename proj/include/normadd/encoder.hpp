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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "normadd/embedding.hpp"
#include "normadd/stub_encoder.hpp"

namespace normadd {

/// Resolves images and prompts to embeddings. Implementations must be
/// deterministic and safe to call from several threads at once.
class EncoderClient {
 public:
  virtual ~EncoderClient() = default;

  /// Throws EncoderError when the image cannot be resolved.
  virtual PatchGridSet encode_image(std::string_view image_id) const = 0;
  /// Throws EncoderError when the prompt cannot be resolved.
  virtual Embedding encode_text(std::string_view prompt) const = 0;
};

/// Region biases to plant into a given image; must be a pure function.
using PlantResolver =
    std::function<std::vector<RegionBias>(std::string_view image_id)>;

struct StubEncoderConfig {
  std::uint64_t seed = 0;
  std::vector<GridShape> layout;
  std::size_t text_dim = 0;
  PlantResolver plants;  // optional
};

class StubEncoder final : public EncoderClient {
 public:
  explicit StubEncoder(StubEncoderConfig config);

  PatchGridSet encode_image(std::string_view image_id) const override;
  Embedding encode_text(std::string_view prompt) const override;

  const StubEncoderConfig& config() const noexcept { return config_; }

 private:
  StubEncoderConfig config_;
};

/// Reads image embeddings written ahead of time (by ingest or an external
/// adapter) as <root>/<image_id>.naeb. Text comes from a prompt-embedding
/// file pair (vectors + one prompt per line) when loaded, else from the
/// fallback encoder.
class FileCacheEncoder final : public EncoderClient {
 public:
  explicit FileCacheEncoder(std::filesystem::path image_root,
                            std::shared_ptr<const EncoderClient> text_fallback = nullptr);

  /// Loads <vectors>.naeb (N x 1 x D) and a text file with N prompts.
  void load_prompt_embeddings(const std::filesystem::path& vectors,
                              const std::filesystem::path& prompts);

  PatchGridSet encode_image(std::string_view image_id) const override;
  Embedding encode_text(std::string_view prompt) const override;

  static std::filesystem::path image_path(const std::filesystem::path& root,
                                          std::string_view image_id);

 private:
  std::filesystem::path image_root_;
  std::shared_ptr<const EncoderClient> text_fallback_;
  std::map<std::string, Embedding, std::less<>> prompts_;
};

}  // namespace normadd

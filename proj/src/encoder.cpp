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

#include "normadd/encoder.hpp"

#include <fstream>

#include "normadd/embedding_file.hpp"
#include "normadd/errors.hpp"

namespace normadd {

StubEncoder::StubEncoder(StubEncoderConfig config) : config_(std::move(config)) {
  if (config_.layout.empty()) throw InvalidArgument("stub encoder: empty layout");
  if (config_.text_dim == 0) throw InvalidArgument("stub encoder: zero text dim");
}

PatchGridSet StubEncoder::encode_image(std::string_view image_id) const {
  std::vector<RegionBias> biases;
  if (config_.plants) biases = config_.plants(image_id);
  return stub_encode(image_id, config_.seed, config_.layout, biases);
}

Embedding StubEncoder::encode_text(std::string_view prompt) const {
  return stub_text_embedding(prompt, config_.seed, config_.text_dim);
}

FileCacheEncoder::FileCacheEncoder(std::filesystem::path image_root,
                                   std::shared_ptr<const EncoderClient> text_fallback)
    : image_root_(std::move(image_root)), text_fallback_(std::move(text_fallback)) {}

std::filesystem::path FileCacheEncoder::image_path(
    const std::filesystem::path& root, std::string_view image_id) {
  auto p = root / std::filesystem::path(std::string(image_id));
  p += ".naeb";
  return p;
}

void FileCacheEncoder::load_prompt_embeddings(
    const std::filesystem::path& vectors, const std::filesystem::path& prompts) {
  auto embeddings = unpack_vectors(read_embedding_file(vectors));
  std::ifstream in(prompts);
  if (!in) throw EncoderError("cannot open prompt list " + prompts.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.size() != embeddings.size()) {
    throw EncoderError("prompt list has " + std::to_string(lines.size()) +
                       " lines but the vector file holds " +
                       std::to_string(embeddings.size()));
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    prompts_.insert_or_assign(lines[i], embeddings[i]);
  }
}

PatchGridSet FileCacheEncoder::encode_image(std::string_view image_id) const {
  const auto path = image_path(image_root_, image_id);
  if (!std::filesystem::exists(path)) {
    throw EncoderError("no cached embedding for '" + std::string(image_id) +
                       "' at " + path.string());
  }
  auto set = read_embedding_file(path);
  if (set.image_id != image_id) {
    throw EncoderError("cached embedding " + path.string() + " belongs to '" +
                       set.image_id + "'");
  }
  return set;
}

Embedding FileCacheEncoder::encode_text(std::string_view prompt) const {
  if (auto it = prompts_.find(prompt); it != prompts_.end()) return it->second;
  if (text_fallback_) return text_fallback_->encode_text(prompt);
  throw EncoderError("prompt not present in the embedding cache: '" +
                     std::string(prompt) + "'");
}

}  // namespace normadd

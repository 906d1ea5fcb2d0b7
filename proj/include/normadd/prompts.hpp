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

// Prompt ensembles: state phrases x templates, averaged text features, and
// the phrase list for a text-described normality.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "normadd/embedding.hpp"
#include "normadd/encoder.hpp"

namespace normadd {

inline constexpr std::string_view kPlaceholder = "{}";

struct PromptSet {
  std::vector<std::string> states;
  std::vector<std::string> templates;
  std::vector<std::string> rendered;  // state-major cartesian product
};

/// Renders every (state, template) pair, iterating states in the outer loop.
/// Each template must contain exactly one "{}".
PromptSet compose_prompts(std::span<const std::string> states,
                          std::span<const std::string> templates);

std::size_t count_placeholders(std::string_view text);
std::string fill_placeholder(std::string_view text, std::string_view value);

enum class FeatureRole { kNormal, kAbnormal, kAddition };

std::string_view to_string(FeatureRole role);

struct TextFeature {
  Embedding vector;
  std::size_t source_prompt_count = 0;
  FeatureRole role = FeatureRole::kNormal;
};

/// Arithmetic mean of the prompt embeddings, left unnormalized.
/// Per component the inputs are summed in sorted order, so the result is
/// exactly invariant to the order of `prompt_embeddings`.
TextFeature aggregate_text_feature(std::span<const Embedding> prompt_embeddings,
                                   FeatureRole role);

/// Encodes every rendered prompt and aggregates them.
TextFeature encode_prompt_set(const PromptSet& prompts,
                              const EncoderClient& encoder, FeatureRole role);

struct NormalitySpec {
  std::string class_name;
  std::string normality_text;
  std::vector<std::string> phrases;
};

/// Text in, lines out. Implementations must tolerate concurrent calls.
class PhraseGeneratorClient {
 public:
  virtual ~PhraseGeneratorClient() = default;
  /// Returns raw response lines. Throws on transport failure or timeout.
  virtual std::vector<std::string> generate(std::string_view instruction) const = 0;
};

/// "Generate concise phrases describing defects of type '<t>' in <class>",
/// with the class passed through display_name().
std::string phrase_instruction(std::string_view normality_text,
                               std::string_view class_name);

/// The deterministic fallback: {t, "<class> with <t>", "<t> on <class>"}.
std::vector<std::string> fallback_phrases(std::string_view normality_text,
                                          std::string_view class_name);

/// Fills spec.phrases. With a generator, its cleaned response lines are used;
/// a failing or empty generator falls back to fallback_phrases() with a
/// warning. Output is lowercase, deduplicated, first-occurrence order.
NormalitySpec generate_phrases(NormalitySpec spec,
                               const PhraseGeneratorClient* generator = nullptr);

/// Class posterior of an image feature against per-class text features.
std::vector<double> zero_shot_classify(const Embedding& image_feature,
                                       std::span<const TextFeature> class_features);

/// Dataset identifiers as prompt text: "metal_nut" -> "metal nut".
std::string display_name(std::string_view identifier);

/// Versioned prompt assets: templates plus generic normal/abnormal state
/// phrases. States may contain "{}" for the class name, which is filled with
/// display_name(class_name).
struct PromptLibrary {
  std::vector<std::string> templates;
  std::vector<std::string> normal_states;
  std::vector<std::string> abnormal_states;

  /// Reads templates.txt, normal_states.txt and abnormal_states.txt from
  /// `dir` (one entry per line, '#' comments and blank lines skipped).
  static PromptLibrary load(const std::filesystem::path& dir);

  PromptSet normal_prompts(std::string_view class_name) const;
  PromptSet abnormal_prompts(std::string_view class_name) const;
  PromptSet addition_prompts(const NormalitySpec& spec) const;
};

std::vector<std::string> read_lines_asset(const std::filesystem::path& path);

}  // namespace normadd

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

#include "normadd/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <set>

#include "normadd/errors.hpp"

namespace normadd {

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Strips list decorations an LLM tends to add: "- ", "* ", "1. ", "2) ",
// and surrounding quotes.
std::string clean_phrase(std::string_view raw) {
  std::string s = trim(raw);
  if (!s.empty() && (s[0] == '-' || s[0] == '*')) s = trim(std::string_view(s).substr(1));
  std::size_t digits = 0;
  while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
  if (digits > 0 && digits < s.size() && (s[digits] == '.' || s[digits] == ')')) {
    s = trim(std::string_view(s).substr(digits + 1));
  }
  while (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = trim(std::string_view(s).substr(1, s.size() - 2));
  }
  if (!s.empty() && s.back() == '.') s.pop_back();
  return to_lower(trim(s));
}

std::vector<std::string> dedupe_lower(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& raw : in) {
    auto p = clean_phrase(raw);
    if (p.empty()) continue;
    if (seen.insert(p).second) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::size_t count_placeholders(std::string_view text) {
  std::size_t n = 0;
  for (auto pos = text.find(kPlaceholder); pos != std::string_view::npos;
       pos = text.find(kPlaceholder, pos + kPlaceholder.size())) {
    ++n;
  }
  return n;
}

std::string fill_placeholder(std::string_view text, std::string_view value) {
  std::string out;
  std::size_t start = 0;
  for (auto pos = text.find(kPlaceholder); pos != std::string_view::npos;
       pos = text.find(kPlaceholder, start)) {
    out.append(text.substr(start, pos - start));
    out.append(value);
    start = pos + kPlaceholder.size();
  }
  out.append(text.substr(start));
  return out;
}

PromptSet compose_prompts(std::span<const std::string> states,
                          std::span<const std::string> templates) {
  if (states.empty()) throw InvalidArgument("compose_prompts: empty state list");
  if (templates.empty()) throw InvalidArgument("compose_prompts: empty template list");
  for (const auto& t : templates) {
    if (count_placeholders(t) != 1) {
      throw InvalidArgument("malformed template '" + t +
                            "': expected exactly one {} placeholder");
    }
  }
  PromptSet set;
  set.states.assign(states.begin(), states.end());
  set.templates.assign(templates.begin(), templates.end());
  set.rendered.reserve(states.size() * templates.size());
  for (const auto& s : states) {
    for (const auto& t : templates) set.rendered.push_back(fill_placeholder(t, s));
  }
  return set;
}

std::string_view to_string(FeatureRole role) {
  switch (role) {
    case FeatureRole::kNormal:
      return "normal";
    case FeatureRole::kAbnormal:
      return "abnormal";
    case FeatureRole::kAddition:
      return "addition";
  }
  return "unknown";
}

TextFeature aggregate_text_feature(std::span<const Embedding> prompt_embeddings,
                                   FeatureRole role) {
  if (prompt_embeddings.empty()) {
    throw InvalidArgument("aggregate_text_feature: empty embedding list");
  }
  const std::size_t dim = prompt_embeddings.front().dim();
  for (const auto& e : prompt_embeddings) {
    if (e.dim() != dim) throw InvalidArgument("aggregate_text_feature: dimension mismatch");
  }
  const std::size_t n = prompt_embeddings.size();
  std::vector<double> mean(dim);
  std::vector<float> column(n);
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t k = 0; k < n; ++k) column[k] = prompt_embeddings[k][c];
    std::sort(column.begin(), column.end());
    double acc = 0.0;
    for (float v : column) acc += v;
    mean[c] = acc / static_cast<double>(n);
  }
  return TextFeature{Embedding::from_doubles(mean), n, role};
}

TextFeature encode_prompt_set(const PromptSet& prompts,
                              const EncoderClient& encoder, FeatureRole role) {
  std::vector<Embedding> embeddings;
  embeddings.reserve(prompts.rendered.size());
  for (const auto& p : prompts.rendered) embeddings.push_back(encoder.encode_text(p));
  return aggregate_text_feature(embeddings, role);
}

std::string phrase_instruction(std::string_view normality_text,
                               std::string_view class_name) {
  return "Generate concise phrases describing defects of type '" +
         std::string(normality_text) + "' in " + display_name(class_name);
}

std::vector<std::string> fallback_phrases(std::string_view normality_text,
                                          std::string_view class_name) {
  const std::string t(normality_text);
  const std::string c = display_name(class_name);
  return dedupe_lower({t, c + " with " + t, t + " on " + c});
}

NormalitySpec generate_phrases(NormalitySpec spec,
                               const PhraseGeneratorClient* generator) {
  if (trim(spec.normality_text).empty()) {
    throw InvalidArgument("generate_phrases: empty normality text");
  }
  if (trim(spec.class_name).empty()) {
    throw InvalidArgument("generate_phrases: empty class name");
  }
  std::vector<std::string> phrases;
  if (generator != nullptr) {
    try {
      phrases = dedupe_lower(
          generator->generate(phrase_instruction(spec.normality_text, spec.class_name)));
      if (phrases.empty()) {
        std::cerr << "[warn] phrase generator returned no phrases for '"
                  << spec.normality_text << "'; using built-in patterns\n";
      }
    } catch (const std::exception& e) {
      std::cerr << "[warn] phrase generator failed (" << e.what()
                << "); using built-in patterns\n";
      phrases.clear();
    }
  }
  if (phrases.empty()) phrases = fallback_phrases(spec.normality_text, spec.class_name);
  spec.phrases = std::move(phrases);
  return spec;
}

std::vector<double> zero_shot_classify(const Embedding& image_feature,
                                       std::span<const TextFeature> class_features) {
  std::vector<Embedding> vectors;
  vectors.reserve(class_features.size());
  for (const auto& f : class_features) vectors.push_back(f.vector);
  return softmax_over(image_feature, vectors);
}

std::vector<std::string> read_lines_asset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open asset " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.push_back(std::move(t));
  }
  return out;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  PromptLibrary lib;
  lib.templates = read_lines_asset(dir / "templates.txt");
  lib.normal_states = read_lines_asset(dir / "normal_states.txt");
  lib.abnormal_states = read_lines_asset(dir / "abnormal_states.txt");
  // Validate templates up front rather than on first use.
  compose_prompts(lib.normal_states, lib.templates);
  compose_prompts(lib.abnormal_states, lib.templates);
  return lib;
}

namespace {

std::vector<std::string> render_states(const std::vector<std::string>& states,
                                       std::string_view class_name) {
  std::vector<std::string> out;
  out.reserve(states.size());
  const auto name = display_name(class_name);
  for (const auto& s : states) out.push_back(fill_placeholder(s, name));
  return out;
}

}  // namespace

std::string display_name(std::string_view identifier) {
  std::string out(identifier);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

PromptSet PromptLibrary::normal_prompts(std::string_view class_name) const {
  return compose_prompts(render_states(normal_states, class_name), templates);
}

PromptSet PromptLibrary::abnormal_prompts(std::string_view class_name) const {
  return compose_prompts(render_states(abnormal_states, class_name), templates);
}

PromptSet PromptLibrary::addition_prompts(const NormalitySpec& spec) const {
  if (spec.phrases.empty()) {
    throw InvalidArgument("normality '" + spec.normality_text +
                          "' has no phrases; run generate_phrases first");
  }
  return compose_prompts(spec.phrases, templates);
}

}  // namespace normadd

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

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "normadd/prompts.hpp"

namespace normadd {

inline constexpr std::chrono::milliseconds kPhraseGeneratorTimeout{10'000};

/// Splits a response body on newlines, dropping a trailing '\r' per line.
std::vector<std::string> split_lines(std::string_view body);

/// POSTs the instruction as text/plain to `url` and reads newline-separated
/// phrases from the response body. Non-2xx responses and timeouts throw.
class HttpPhraseGenerator final : public PhraseGeneratorClient {
 public:
  explicit HttpPhraseGenerator(std::string url,
                               std::chrono::milliseconds timeout = kPhraseGeneratorTimeout);

  std::vector<std::string> generate(std::string_view instruction) const override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

/// Runs `/bin/sh -c command`, writes the instruction to its stdin and reads
/// phrases from its stdout. The child is killed after the timeout.
class SubprocessPhraseGenerator final : public PhraseGeneratorClient {
 public:
  explicit SubprocessPhraseGenerator(std::string command,
                                     std::chrono::milliseconds timeout = kPhraseGeneratorTimeout);

  std::vector<std::string> generate(std::string_view instruction) const override;

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
};

}  // namespace normadd

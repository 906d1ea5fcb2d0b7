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

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <random>
#include <thread>

#include "httplib.h"
#include "normadd/errors.hpp"
#include "normadd/phrase_generator.hpp"
#include "normadd/prompts.hpp"
#include "normadd/stub_encoder.hpp"
#include "test_util.hpp"

namespace normadd {
namespace {

using namespace std::chrono_literals;

class ScriptedGenerator final : public PhraseGeneratorClient {
 public:
  explicit ScriptedGenerator(std::vector<std::string> lines, bool fail = false)
      : lines_(std::move(lines)), fail_(fail) {}
  std::vector<std::string> generate(std::string_view instruction) const override {
    last_instruction = std::string(instruction);
    if (fail_) throw EncoderError("generator offline");
    return lines_;
  }
  mutable std::string last_instruction;

 private:
  std::vector<std::string> lines_;
  bool fail_;
};

TEST(ComposePrompts, Cardinality) {
  const std::vector<std::string> states{"a", "b"};
  const std::vector<std::string> templates{"x {}", "{} y", "z {} z"};
  EXPECT_EQ(compose_prompts(states, templates).rendered.size(), 6u);
}

TEST(ComposePrompts, RendersStateIntoTemplate) {
  const std::vector<std::string> states{"poked capsule"};
  const std::vector<std::string> templates{"a photo of a {}"};
  EXPECT_EQ(compose_prompts(states, templates).rendered.front(), "a photo of a poked capsule");
}

TEST(ComposePrompts, StateMajorOrderGolden) {
  const std::vector<std::string> states{"s1", "s2"};
  const std::vector<std::string> templates{"A {}", "B {}"};
  EXPECT_EQ(compose_prompts(states, templates).rendered,
            (std::vector<std::string>{"A s1", "B s1", "A s2", "B s2"}));
}

TEST(ComposePrompts, Errors) {
  const std::vector<std::string> none;
  const std::vector<std::string> one{"x {}"};
  EXPECT_THROW(compose_prompts(none, one), InvalidArgument);
  EXPECT_THROW(compose_prompts(one, none), InvalidArgument);
  const std::vector<std::string> zero{"no placeholder"};
  const std::vector<std::string> two{"{} and {}"};
  EXPECT_THROW(compose_prompts(one, zero), InvalidArgument);
  EXPECT_THROW(compose_prompts(one, two), InvalidArgument);
}

TEST(AggregateTextFeature, MeanOfOne) {
  std::vector<Embedding> v{Embedding{0.25f, -1.0f}};
  const auto f = aggregate_text_feature(v, FeatureRole::kAbnormal);
  EXPECT_EQ(f.vector, v[0]);
  EXPECT_EQ(f.source_prompt_count, 1u);
  EXPECT_EQ(f.role, FeatureRole::kAbnormal);
}

TEST(AggregateTextFeature, OppositeVectorsCancel) {
  std::vector<Embedding> v{Embedding{0.3f, -0.7f}, Embedding{-0.3f, 0.7f}};
  const auto f = aggregate_text_feature(v, FeatureRole::kNormal);
  EXPECT_EQ(f.vector, (Embedding{0.0f, 0.0f}));
  EXPECT_THROW(cosine_similarity(f.vector, Embedding{1.0f, 0.0f}), InvalidArgument);
}

TEST(AggregateTextFeature, PlainMeanNotRenormalized) {
  std::vector<Embedding> v{Embedding{1.0f, 0.0f}, Embedding{0.0f, 1.0f}};
  EXPECT_EQ(aggregate_text_feature(v, FeatureRole::kNormal).vector, (Embedding{0.5f, 0.5f}));
}

TEST(AggregateTextFeature, ExactlyPermutationInvariant) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Embedding> v;
    for (int i = 0; i < 17; ++i) v.push_back(testing::random_embedding(rng, 9));
    const auto a = aggregate_text_feature(v, FeatureRole::kNormal);
    std::shuffle(v.begin(), v.end(), rng);
    EXPECT_EQ(aggregate_text_feature(v, FeatureRole::kNormal).vector, a.vector);
  }
}

TEST(AggregateTextFeature, Errors) {
  EXPECT_THROW(aggregate_text_feature(std::vector<Embedding>{}, FeatureRole::kNormal),
               InvalidArgument);
  std::vector<Embedding> v{Embedding{1.0f}, Embedding{1.0f, 2.0f}};
  EXPECT_THROW(aggregate_text_feature(v, FeatureRole::kNormal), InvalidArgument);
}

TEST(GeneratePhrases, FallbackWithoutGenerator) {
  const auto spec = generate_phrases(NormalitySpec{"carpet", "thread", {}});
  EXPECT_EQ(spec.phrases,
            (std::vector<std::string>{"thread", "carpet with thread", "thread on carpet"}));
}

TEST(GeneratePhrases, FallbackIsDeterministic) {
  EXPECT_EQ(generate_phrases(NormalitySpec{"metal_nut", "Flip", {}}).phrases,
            generate_phrases(NormalitySpec{"metal_nut", "Flip", {}}).phrases);
  EXPECT_EQ(generate_phrases(NormalitySpec{"metal_nut", "flip", {}}).phrases[1],
            "metal nut with flip");
}

TEST(GeneratePhrases, ForwardsInstructionAndCleansResponse) {
  ScriptedGenerator gen({"1. Poked capsule", "- fractured capsule.", "\"Poked capsule\"", "",
                         "  * capsule with a small hole  "});
  const auto spec = generate_phrases(NormalitySpec{"capsule", "poke", {}}, &gen);
  EXPECT_EQ(gen.last_instruction,
            "Generate concise phrases describing defects of type 'poke' in capsule");
  EXPECT_EQ(spec.phrases, (std::vector<std::string>{"poked capsule", "fractured capsule",
                                                     "capsule with a small hole"}));
}

TEST(GeneratePhrases, GeneratorFailureFallsBack) {
  ScriptedGenerator failing({}, true);
  EXPECT_EQ(generate_phrases(NormalitySpec{"carpet", "thread", {}}, &failing).phrases,
            fallback_phrases("thread", "carpet"));
  ScriptedGenerator empty({"", "  "});
  EXPECT_EQ(generate_phrases(NormalitySpec{"carpet", "thread", {}}, &empty).phrases,
            fallback_phrases("thread", "carpet"));
}

TEST(GeneratePhrases, Errors) {
  EXPECT_THROW(generate_phrases(NormalitySpec{"carpet", "", {}}), InvalidArgument);
  EXPECT_THROW(generate_phrases(NormalitySpec{"carpet", "   ", {}}), InvalidArgument);
  EXPECT_THROW(generate_phrases(NormalitySpec{"", "thread", {}}), InvalidArgument);
}

TEST(ZeroShotClassify, SingleClass) {
  std::vector<TextFeature> f{TextFeature{Embedding{1.0f, 2.0f}, 1, FeatureRole::kNormal}};
  EXPECT_EQ(zero_shot_classify(Embedding{0.5f, 0.5f}, f), std::vector<double>{1.0});
}

TEST(ZeroShotClassify, EquidistantIsEven) {
  std::vector<TextFeature> f{TextFeature{Embedding{1.0f, 0.0f}, 1, FeatureRole::kNormal},
                             TextFeature{Embedding{0.0f, 1.0f}, 1, FeatureRole::kAbnormal}};
  const auto p = zero_shot_classify(Embedding{1.0f, 1.0f}, f);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(ZeroShotClassify, EqualsSoftmaxOver) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    std::vector<TextFeature> f;
    std::vector<Embedding> raw;
    for (int k = 0; k < 4; ++k) {
      raw.push_back(testing::random_embedding(rng, 6));
      f.push_back(TextFeature{raw.back(), 1, FeatureRole::kNormal});
    }
    const auto g = testing::random_embedding(rng, 6);
    EXPECT_EQ(zero_shot_classify(g, f), softmax_over(g, raw));
  }
}

TEST(PromptLibraryAsset, LoadsShippedAssets) {
  const auto lib = PromptLibrary::load(testing::asset_dir());
  EXPECT_FALSE(lib.templates.empty());
  for (const auto& t : lib.templates) EXPECT_EQ(count_placeholders(t), 1u) << t;
  const auto normal = lib.normal_prompts("metal_nut");
  EXPECT_EQ(normal.rendered.size(), lib.normal_states.size() * lib.templates.size());
  for (const auto& p : normal.rendered) {
    EXPECT_NE(p.find("metal nut"), std::string::npos) << p;
    EXPECT_EQ(p.find("{}"), std::string::npos) << p;
  }
  NormalitySpec spec{"carpet", "thread", {}};
  EXPECT_THROW(lib.addition_prompts(spec), InvalidArgument);
  spec = generate_phrases(spec);
  EXPECT_EQ(lib.addition_prompts(spec).rendered.size(), 3 * lib.templates.size());
}

TEST(PromptLibraryAsset, MissingDirectory) {
  EXPECT_THROW(PromptLibrary::load(testing::data_dir() / "missing"), NotFound);
}

TEST(SplitLines, HandlesCrLfAndBlankLines) {
  EXPECT_EQ(split_lines("a\r\nb\n\nc"), (std::vector<std::string>{"a", "b", "", "c"}));
}

TEST(SubprocessGenerator, PipesInstructionThroughCommand) {
  SubprocessPhraseGenerator gen("sed 's/^/echo: /'");
  const auto lines = gen.generate("hello world");
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines.front(), "echo: hello world");
}

TEST(SubprocessGenerator, FailureAndTimeout) {
  SubprocessPhraseGenerator failing("exit 3");
  EXPECT_THROW(failing.generate("x"), EncoderError);
  SubprocessPhraseGenerator slow("sleep 5", 200ms);
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(slow.generate("x"), EncoderError);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 3s);
  // The failure path of generate_phrases falls back instead of aborting.
  EXPECT_EQ(generate_phrases(NormalitySpec{"carpet", "thread", {}}, &slow).phrases,
            fallback_phrases("thread", "carpet"));
}

class LocalServer {
 public:
  explicit LocalServer(std::chrono::milliseconds delay) {
    server_.Post("/phrases", [delay](const httplib::Request& req, httplib::Response& res) {
      std::this_thread::sleep_for(delay);
      res.set_content("poked capsule\n" + req.body.substr(0, 8) + "\n", "text/plain");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/phrases"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpGenerator, PostsInstruction) {
  LocalServer server(0ms);
  HttpPhraseGenerator gen(server.url());
  const auto lines = gen.generate("Generate concise phrases");
  EXPECT_EQ(lines, (std::vector<std::string>{"poked capsule", "Generate"}));
}

TEST(HttpGenerator, TimeoutAndBadStatusFallBack) {
  LocalServer server(1500ms);
  HttpPhraseGenerator gen(server.url(), 300ms);
  EXPECT_THROW(gen.generate("x"), EncoderError);
  HttpPhraseGenerator wrong_path(server.url() + "/nope");
  EXPECT_THROW(wrong_path.generate("x"), EncoderError);
  EXPECT_THROW(HttpPhraseGenerator("not a url"), InvalidArgument);
}

}  // namespace
}  // namespace normadd

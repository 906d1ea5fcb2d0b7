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

#include <thread>

#include "normadd/errors.hpp"
#include "normadd/png.hpp"
#include "normadd/service/commands.hpp"
#include "normadd/service/server.hpp"
#include "test_util.hpp"

namespace normadd::service {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<std::string> no_env(const std::string&) { return std::nullopt; }

// One synthetic cache and a live server on an ephemeral port, shared by the
// tests of this file.
class ServerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("server");
    const auto conf = cmd_make_fixture(dir_->path());
    const auto ws = Workspace::open(load_config(conf, no_env));
    cmd_ingest(*ws);
    service_ = new Service(Session::open(ws));
    server_ = new httplib::Server();
    service_->mount(*server_);
    port_ = server_->bind_to_any_port("127.0.0.1");
    thread_ = new std::thread([] { server_->listen_after_bind(); });
    server_->wait_until_ready();
  }

  static void TearDownTestSuite() {
    server_->stop();
    thread_->join();
    delete thread_;
    delete server_;
    delete service_;
    delete dir_;
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }

  static json body(const httplib::Result& r) {
    EXPECT_TRUE(r);
    return json::parse(r->body);
  }

  static json post(httplib::Client& c, const std::string& path, const json& j) {
    return body(c.Post(path, j.dump(), "application/json"));
  }

  static inline testing::TempDir* dir_ = nullptr;
  static inline Service* service_ = nullptr;
  static inline httplib::Server* server_ = nullptr;
  static inline std::thread* thread_ = nullptr;
  static inline int port_ = 0;
};

TEST_F(ServerTest, Health) {
  auto c = client();
  auto r = c.Get("/api/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Content-Type"), "application/json");
  const auto j = json::parse(r->body);
  EXPECT_EQ(j.at("status"), "ok");
  EXPECT_EQ(j.at("classes"), 1);
}

TEST_F(ServerTest, ClassesGroupsAndImages) {
  auto c = client();
  EXPECT_EQ(body(c.Get("/api/classes")).at("classes"), json::array({"widget"}));

  const auto groups = body(c.Get("/api/classes/widget/groups"));
  ASSERT_EQ(groups.at("groups").size(), 2u);
  EXPECT_EQ(groups.at("groups")[1].at("name"), "scuff");
  EXPECT_EQ(groups.at("groups")[1].at("types"), json::array({"scuff"}));

  const auto test = body(c.Get("/api/classes/widget/images?split=test"));
  EXPECT_EQ(test.at("images").size(), 36u);
  EXPECT_EQ(body(c.Get("/api/classes/widget/images")).at("images").size(), 36u);
  EXPECT_EQ(body(c.Get("/api/classes/widget/images?split=train")).at("images").size(), 8u);

  auto bad = c.Get("/api/classes/widget/images?split=val");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto missing = c.Get("/api/classes/gadget/groups");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body).at("error").at("code"), "not_found");
}

TEST_F(ServerTest, ImageBytes) {
  auto c = client();
  auto r = c.Get("/api/images/widget/test/scuff/002");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Content-Type"), "image/png");
  const auto file = testing::slurp(dir_->path() / "data/widget/test/scuff/002.png");
  EXPECT_EQ(std::vector<std::uint8_t>(r->body.begin(), r->body.end()), file);
  auto none = c.Get("/api/images/widget/test/scuff/777");
  ASSERT_TRUE(none);
  EXPECT_EQ(none->status, 404);
}

TEST_F(ServerTest, PreviewMatchesLibraryAndIsDeterministic) {
  auto c = client();
  const json req{{"class", "widget"},
                 {"image_id", "test/scuff/001"},
                 {"normality_text", "scuff"},
                 {"detector", "zs"}};
  auto r1 = c.Post("/api/preview", req.dump(), "application/json");
  auto r2 = c.Post("/api/preview", req.dump(), "application/json");
  ASSERT_TRUE(r1);
  ASSERT_TRUE(r2);
  ASSERT_EQ(r1->status, 200) << r1->body;
  const auto a = json::parse(r1->body);
  const auto b = json::parse(r2->body);
  for (const char* k : {"map_before", "map_sup", "map_after"}) {
    EXPECT_EQ(a.at(k).dump(), b.at(k).dump()) << k;
  }
  const auto direct = cmd_preview(service_->session(), "widget", "test/scuff/001", "scuff",
                                  BaseDetector::kZeroShot);
  EXPECT_EQ(a.at("score_before"), direct.score_before);
  EXPECT_EQ(a.at("score_after"), direct.score_after);
  EXPECT_LT(a.at("score_after").get<double>(), a.at("score_before").get<double>());

  // The PNG payload decodes to the quantized map.
  const auto data = a.at("map_sup").at("data").get<std::string>();
  EXPECT_EQ(data, direct.to_json().at("map_sup").at("data").get<std::string>());
  const auto q = quantize_map(direct.map_sup.grid);
  EXPECT_EQ(a.at("map_sup").at("min"), q.min);
  EXPECT_EQ(a.at("map_sup").at("max"), q.max);
  EXPECT_EQ(a.at("map_sup").at("width"), 256);
}

TEST_F(ServerTest, PreviewErrors) {
  auto c = client();
  const auto unknown = post(c, "/api/preview",
                            {{"class", "gadget"}, {"image_id", "test/good/000"},
                             {"normality_text", "scuff"}});
  EXPECT_EQ(unknown.at("error").at("code"), "not_found");

  auto r = c.Post("/api/preview", "{", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  r = c.Post("/api/preview", json{{"class", "widget"}}.dump(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  r = c.Post("/api/preview",
             json{{"class", "widget"}, {"image_id", "test/good/000"}, {"normality_text", ""}}
                 .dump(),
             "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  r = c.Post("/api/preview",
             json{{"class", "widget"},
                  {"image_id", "test/good/000"},
                  {"normality_text", "scuff"},
                  {"detector", "bank"}}
                 .dump(),
             "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 404);
  EXPECT_NE(r->body.find("unavailable"), std::string::npos);
  r = c.Post("/api/preview",
             json{{"class", "widget"},
                  {"image_id", "test/good/000"},
                  {"normality_text", "scuff"},
                  {"detector", "knn"}}
                 .dump(),
             "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
}

TEST_F(ServerTest, EvaluateMatchesCli) {
  auto c = client();
  auto r = c.Post("/api/evaluate",
                  json{{"class", "widget"}, {"group", "scuff"}, {"detector", "zs"}}.dump(),
                  "application/json");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const auto direct =
      cmd_eval(service_->session(), {"widget", "scuff", BaseDetector::kZeroShot});
  ASSERT_EQ(direct.reports.size(), 1u);
  EXPECT_EQ(json::parse(r->body), to_json(direct.reports[0]));

  r = c.Post("/api/evaluate", json{{"class", "widget"}, {"group", "dent"}}.dump(),
             "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 422);
  EXPECT_EQ(json::parse(r->body).at("error").at("code"), "protocol_error");
}

TEST_F(ServerTest, ConcurrentPreviewsAgree) {
  const json req{{"class", "widget"}, {"image_id", "test/crack/004"}, {"normality_text", "crack"}};
  std::vector<std::string> bodies(6);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    threads.emplace_back([&, i] {
      auto c = client();
      if (auto r = c.Post("/api/preview", req.dump(), "application/json")) bodies[i] = r->body;
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& b : bodies) EXPECT_EQ(b, bodies[0]);
  EXPECT_FALSE(bodies[0].empty());
}

TEST_F(ServerTest, BusyPortFailsToStart) {
  EXPECT_THROW(run_service(*service_, "127.0.0.1", static_cast<std::uint16_t>(port_)), Error);
}

}  // namespace
}  // namespace normadd::service

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
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include "normadd/errors.hpp"
#include "normadd/feature_bank.hpp"
#include "normadd/service/cache.hpp"
#include "normadd/service/commands.hpp"
#include "normadd/service/config.hpp"
#include "normadd/service/workspace.hpp"
#include "test_util.hpp"

namespace normadd::service {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::optional<std::string> no_env(const std::string&) { return std::nullopt; }

EnvLookup env_from(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

std::string read(const fs::path& p) {
  const auto b = testing::slurp(p);
  return {b.begin(), b.end()};
}

// Captures spdlog output for the lifetime of the object.
class LogCapture {
 public:
  LogCapture() : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(stream_);
    spdlog::set_default_logger(std::make_shared<spdlog::logger>("capture", sink));
  }
  ~LogCapture() { spdlog::set_default_logger(previous_); }
  std::string text() const { return stream_.str(); }

 private:
  std::ostringstream stream_;
  std::shared_ptr<spdlog::logger> previous_;
};

struct SyntheticFixture {
  TempDir dir{"svc"};
  fs::path conf = cmd_make_fixture(dir.path());

  Config config(std::map<std::string, std::string> env = {}) const {
    return load_config(conf, env_from(std::move(env)));
  }
  std::shared_ptr<const Workspace> workspace(std::map<std::string, std::string> env = {}) const {
    return Workspace::open(config(std::move(env)));
  }
};

// ---- config ---------------------------------------------------------------------

TEST(Config, DefaultsWithoutFile) {
  const auto c = load_config(std::nullopt, no_env);
  EXPECT_EQ(c.cache_dir, ".nand-cache");
  EXPECT_EQ(c.prompts_dir, default_asset_dir());
  EXPECT_EQ(c.groups_path, default_asset_dir() / "mvtec_groups.txt");
  EXPECT_EQ(c.detector, BaseDetector::kZeroShot);
  EXPECT_EQ(c.text_dim, 128u);
  EXPECT_EQ(c.bank_fraction, 0.1);
  EXPECT_EQ(c.suppression_size, 256u);
  EXPECT_EQ(c.service_port, 8080);
  EXPECT_THROW(c.require_dataset(), ConfigError);
}

TEST(Config, FileValuesResolveAgainstFileDirectory) {
  TempDir tmp("cfg");
  fs::create_directories(tmp.path() / "data");
  write(tmp.path() / "sub" / "n.conf",
        "# comment\n\ndataset.root = ../data\ncache.dir=c  # trailing\n"
        "encoder.layout = 4x4x16\ndetector.layers = 0, 2\nbank.fraction = 0.5\n"
        "detector.kind = bank\nservice.port = 9000\n");
  const auto c = load_config(tmp.path() / "sub" / "n.conf", no_env);
  EXPECT_EQ(fs::weakly_canonical(c.dataset_root), fs::weakly_canonical(tmp.path() / "data"));
  EXPECT_EQ(c.cache_dir, tmp.path() / "sub" / "c");
  EXPECT_EQ(c.text_dim, 16u);
  EXPECT_EQ(c.detector_layers, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(c.bank_fraction, 0.5);
  EXPECT_EQ(c.detector, BaseDetector::kBank);
  EXPECT_EQ(c.service_port, 9000);
  EXPECT_NO_THROW(c.require_dataset());
}

TEST(Config, EnvironmentOverridesFile) {
  TempDir tmp("cfg-env");
  write(tmp.path() / "n.conf", "bank.fraction = 0.5\nencoder.seed = 3\n");
  const auto c = load_config(tmp.path() / "n.conf",
                             env_from({{"NAND_BANK_FRACTION", "0.25"},
                                       {"NAND_ENCODER_TEXT_DIM", "64"},
                                       {"NAND_SERVICE_PORT", "1234"}}));
  EXPECT_EQ(c.bank_fraction, 0.25);
  EXPECT_EQ(c.encoder_seed, 3u);
  EXPECT_EQ(c.text_dim, 64u);
  EXPECT_EQ(c.service_port, 1234);
  EXPECT_EQ(env_name("phrase_generator.url"), "NAND_PHRASE_GENERATOR_URL");
  for (const auto& key : config_keys()) EXPECT_EQ(env_name(key).rfind("NAND_", 0), 0u);
}

TEST(Config, RejectsBadValues) {
  const std::vector<std::map<std::string, std::string>> bad = {
      {{"NAND_BANK_FRACTION", "0"}},
      {{"NAND_BANK_FRACTION", "1.5"}},
      {{"NAND_BANK_FRACTION", "abc"}},
      {{"NAND_DETECTOR_SMOOTHING_SIGMA", "-1"}},
      {{"NAND_DETECTOR_LOGIT_SCALE", "0"}},
      {{"NAND_DETECTOR_KIND", "knn"}},
      {{"NAND_ENCODER_KIND", "clip"}},
      {{"NAND_ENCODER_LAYOUT", "4x4"}},
      {{"NAND_SERVICE_PORT", "70000"}},
      {{"NAND_DATASET_ROOT", "/nonexistent/dataset"}},
      {{"NAND_PROJECTION_PATH", "/nonexistent/p.napj"}},
      {{"NAND_ENCODER_KIND", "files"}},
      {{"NAND_DETECTOR_KIND", "external"}},
      {{"NAND_ENCODER_PROMPT_LIST", "/etc/hostname"}},
      {{"NAND_SUPPRESSION_SIZE", "0"}},
  };
  for (const auto& env : bad) {
    EXPECT_THROW(load_config(std::nullopt, env_from(env)), ConfigError) << env.begin()->first;
  }
  EXPECT_NO_THROW(load_config(std::nullopt, env_from({{"NAND_BANK_FRACTION", "1"}})));
  EXPECT_NO_THROW(load_config(std::nullopt, env_from({{"NAND_DETECTOR_SMOOTHING_SIGMA", "0"}})));

  TempDir tmp("cfg-bad");
  write(tmp.path() / "a.conf", "no.such.key = 1\n");
  EXPECT_THROW(load_config(tmp.path() / "a.conf", no_env), ConfigError);
  write(tmp.path() / "b.conf", "dataset.root\n");
  EXPECT_THROW(load_config(tmp.path() / "b.conf", no_env), ConfigError);
  EXPECT_THROW(load_config(tmp.path() / "missing.conf", no_env), ConfigError);
}

TEST(Config, DumpReloadsToSameConfig) {
  SyntheticFixture fx;
  const auto c = fx.config({{"NAND_DETECTOR_LAYERS", "1"}, {"NAND_BANK_FRACTION", "0.3"}});
  TempDir tmp("cfg-dump");
  write(tmp.path() / "d.conf", c.dump());
  EXPECT_EQ(load_config(tmp.path() / "d.conf", no_env).dump(), c.dump());
}

// ---- cache primitives -----------------------------------------------------------

TEST(Cache, HashIsFnv1a64Hex) {
  EXPECT_EQ(hash_bytes({}), "cbf29ce484222325");
  const std::string a = "a";
  EXPECT_EQ(hash_bytes({reinterpret_cast<const std::uint8_t*>(a.data()), 1}),
            "af63dc4c8601ec8c");
  EXPECT_THROW(hash_file("/nonexistent/file"), NotFound);
}

TEST(Cache, ManifestRoundTrip) {
  TempDir tmp("manifest");
  const CacheLayout layout{tmp.path()};
  EXPECT_THROW(CacheManifest::load(layout), NotFound);
  CacheManifest m;
  m.encoder = "stub seed=1";
  m.images["c/test/good/000"] = ImageEntry{{"embeddings/c/test/good/000.naeb", "0011"}, "beef"};
  m.banks["c"] = BankEntry{{"banks/c.nafb", "22"}, 0.25, 1, 99};
  m.prompt_list = FileEntry{"prompts.txt", "33"};
  m.save(layout);
  EXPECT_EQ(CacheManifest::load(layout), m);
  write(layout.manifest(), "{not json");
  EXPECT_THROW(CacheManifest::load(layout), FormatError);
  write(layout.manifest(), R"({"version": 9, "encoder": "", "images": {}, "banks": {}})");
  EXPECT_THROW(CacheManifest::load(layout), FormatError);
}

TEST(Cache, LockDiscipline) {
  TempDir tmp("lock");
  const CacheLayout layout{tmp.path() / "cache"};
  {
    auto ex = CacheLock::acquire(layout, LockMode::kExclusive);
    EXPECT_FALSE(CacheLock::try_acquire(layout, LockMode::kShared));
    EXPECT_FALSE(CacheLock::try_acquire(layout, LockMode::kExclusive));
    EXPECT_THROW(CacheLock::acquire(layout, LockMode::kShared, std::chrono::milliseconds(100)),
                 Error);
  }
  auto r1 = CacheLock::acquire(layout, LockMode::kShared);
  auto r2 = CacheLock::try_acquire(layout, LockMode::kShared);
  EXPECT_TRUE(r2);
  EXPECT_FALSE(CacheLock::try_acquire(layout, LockMode::kExclusive));
  r2.reset();
  CacheLock moved = std::move(r1);
  EXPECT_FALSE(CacheLock::try_acquire(layout, LockMode::kExclusive));
  moved = CacheLock::acquire(layout, LockMode::kShared);
}

// ---- ingest ---------------------------------------------------------------------

TEST(Ingest, SecondRunIsAllHashHits) {
  SyntheticFixture fx;
  const auto ws = fx.workspace();
  const auto first = cmd_ingest(*ws);
  EXPECT_EQ(first.encoded, 44u);
  EXPECT_GT(first.prompts, 0u);
  const auto manifest = read(ws->cache().manifest());
  const auto second = cmd_ingest(*ws);
  EXPECT_EQ(second.encoded + second.regenerated + second.repaired, 0u);
  EXPECT_EQ(second.reused, 44u);
  EXPECT_EQ(read(ws->cache().manifest()), manifest);
}

TEST(Ingest, DeletedFileIsRegeneratedAlone) {
  SyntheticFixture fx;
  const auto ws = fx.workspace();
  cmd_ingest(*ws);
  const auto victim = ws->cache().embeddings() / "widget/test/scuff/004.naeb";
  const auto original = testing::slurp(victim);
  fs::remove(victim);
  const auto s = cmd_ingest(*ws);
  EXPECT_EQ(s.regenerated, 1u);
  EXPECT_EQ(s.reused, 43u);
  EXPECT_EQ(s.encoded + s.repaired, 0u);
  EXPECT_EQ(testing::slurp(victim), original);
}

TEST(Ingest, CorruptedFileIsRebuiltWithWarning) {
  SyntheticFixture fx;
  const auto ws = fx.workspace();
  cmd_ingest(*ws);
  const auto victim = ws->cache().embeddings() / "widget/train/good/002.naeb";
  const auto original = testing::slurp(victim);
  {
    std::fstream f(victim, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    f.put('\x7f');
  }
  // The session refuses the corrupted file.
  const auto session = Session::open(ws);
  EXPECT_THROW(session->encoder().encode_image("widget/train/good/002"), EncoderError);

  LogCapture log;
  const auto s = cmd_ingest(*ws);
  EXPECT_EQ(s.repaired, 1u);
  EXPECT_EQ(s.reused, 43u);
  EXPECT_NE(log.text().find("fails its hash check"), std::string::npos) << log.text();
  EXPECT_EQ(testing::slurp(victim), original);
}

TEST(Ingest, EncoderChangeAndRemovedImages) {
  SyntheticFixture fx;
  cmd_ingest(*fx.workspace());
  const auto reseeded = fx.workspace({{"NAND_ENCODER_SEED", "7"}});
  EXPECT_THROW(Session::open(reseeded), ProtocolError);
  LogCapture log;
  EXPECT_EQ(cmd_ingest(*reseeded).encoded, 44u);
  EXPECT_NE(log.text().find("encoder settings changed"), std::string::npos);

  fs::remove(fx.dir.path() / "data/widget/test/good/000.png");
  const auto s = cmd_ingest(*fx.workspace({{"NAND_ENCODER_SEED", "7"}}));
  EXPECT_EQ(s.removed, 1u);
  EXPECT_EQ(s.reused, 43u);
  EXPECT_FALSE(fs::exists(reseeded->cache().embeddings() / "widget/test/good/000.naeb"));
}

TEST(Ingest, SessionNeedsManifest) {
  SyntheticFixture fx;
  EXPECT_THROW(Session::open(fx.workspace()), NotFound);
}

// ---- banks ----------------------------------------------------------------------

TEST(BuildBank, WritesCoresetAndInvalidatesOnTrainChange) {
  SyntheticFixture fx;
  const auto ws = fx.workspace();
  EXPECT_THROW(cmd_build_bank(*ws, "widget", 0.25), NotFound);
  cmd_ingest(*ws);
  EXPECT_THROW(cmd_build_bank(*ws, "widget", 0.0), ConfigError);
  EXPECT_THROW(cmd_build_bank(*ws, "nothing", 0.5), ProtocolError);
  const auto e = cmd_build_bank(*ws, "widget", 0.25);
  EXPECT_EQ(e.source_count, 8u * 16 * 16);
  const auto bank = read_bank_file(ws->cache().root / e.file.path);
  EXPECT_EQ(bank.size(), coreset_size(0.25, 2048));
  EXPECT_EQ(bank.coreset_fraction(), 0.25);

  const auto session = Session::open(ws);
  EXPECT_EQ(session->base_detector("widget", BaseDetector::kBank)->kind(),
            DetectorKind::kFeatureBank);

  // Reingest without changes keeps the bank; a changed train image drops it.
  EXPECT_EQ(cmd_ingest(*ws).banks_dropped, 0u);
  write(fx.dir.path() / "data/widget/train/good/000.png", "different bytes");
  LogCapture log;
  EXPECT_EQ(cmd_ingest(*ws).banks_dropped, 1u);
  EXPECT_THROW(Session::open(ws)->base_detector("widget", BaseDetector::kBank), NotFound);
}

// ---- adapter layout -----------------------------------------------------------------

TEST(EncodeStub, FilesEncoderMatchesStubEncoder) {
  SyntheticFixture fx;
  // Plain stub (no plants) as the reference.
  TempDir ref_cache("svc-ref");
  const auto ref = fx.workspace({{"NAND_ENCODER_PLANTS", ""},
                                 {"NAND_ENCODER_SEED", "5"},
                                 {"NAND_CACHE_DIR", ref_cache.path().string()}});
  const auto out = fx.dir.path() / "adapter";
  const auto st = cmd_encode_stub(*ref, 5, out);
  EXPECT_EQ(st.images, 44u);
  EXPECT_TRUE(fs::exists(out / "widget/test/scuff/000.naeb"));

  TempDir files_cache("svc-files");
  const auto files = fx.workspace({{"NAND_ENCODER_KIND", "files"},
                                   {"NAND_ENCODER_EMBEDDING_DIR", out.string()},
                                   {"NAND_ENCODER_PROMPT_VECTORS", (out / "prompts.naeb").string()},
                                   {"NAND_ENCODER_PROMPT_LIST", (out / "prompts.txt").string()},
                                   {"NAND_CACHE_DIR", files_cache.path().string()}});
  cmd_ingest(*ref);
  const auto fs_stats = cmd_ingest(*files);
  EXPECT_EQ(fs_stats.encoded, 44u);
  EXPECT_EQ(fs_stats.prompts, st.prompts);

  const EvalRequest req{"widget", std::nullopt, BaseDetector::kZeroShot};
  const auto a = cmd_eval(*Session::open(ref), req);
  const auto b = cmd_eval(*Session::open(files), req);
  ASSERT_TRUE(a.ok());
  ASSERT_TRUE(b.ok());
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

// ---- eval -----------------------------------------------------------------------------

void make_mvtec_like(const fs::path& root) {
  auto add = [&](const std::string& cls, const std::string& split, const std::string& type,
                 int n) {
    for (int i = 0; i < n; ++i) {
      write(root / cls / split / type / ("00" + std::to_string(i) + ".png"),
            cls + split + type + std::to_string(i));
    }
  };
  add("carpet", "train", "good", 3);
  add("carpet", "test", "good", 3);
  for (const char* t : {"color", "cut", "hole", "metal_contamination", "thread"}) {
    add("carpet", "test", t, 2);
  }
  add("toothbrush", "train", "good", 2);
  add("toothbrush", "test", "good", 2);
  add("toothbrush", "test", "defective", 3);
  add("cable", "train", "good", 2);
  add("cable", "test", "good", 2);
  add("cable", "test", "cable_swap", 2);
  add("cable", "test", "bent_wire", 2);
  add("cable", "test", "combined", 2);
}

struct MvtecFixture {
  TempDir dir{"mvtec"};
  std::shared_ptr<const Workspace> ws;
  std::shared_ptr<const Session> session;

  MvtecFixture() {
    make_mvtec_like(dir.path() / "data");
    ws = Workspace::open(load_config(
        std::nullopt, env_from({{"NAND_DATASET_ROOT", (dir.path() / "data").string()},
                                {"NAND_CACHE_DIR", (dir.path() / "cache").string()},
                                {"NAND_ENCODER_LAYOUT", "6x6x32,3x3x32"},
                                {"NAND_DETECTOR_MAP_SIZE", "32"},
                                {"NAND_SUPPRESSION_SIZE", "64"}})));
    cmd_ingest(*ws);
    session = Session::open(ws);
  }
};

TEST(Eval, CarpetYieldsOneReportPerGroup) {
  MvtecFixture fx;
  const auto out = cmd_eval(*fx.session, {"carpet", std::nullopt, BaseDetector::kZeroShot});
  ASSERT_TRUE(out.ok()) << out.render();
  std::vector<std::string> groups;
  for (const auto& r : out.reports) groups.push_back(r.group);
  EXPECT_EQ(groups, (std::vector<std::string>{"color", "cut", "metal", "thread"}));
  EXPECT_EQ(out.reports[1].scores.size(), 13u);
  EXPECT_NE(out.render().find("carpet\taverage\t"), std::string::npos);
}

TEST(Eval, ToothbrushReportsProtocolErrorAndRunContinues) {
  MvtecFixture fx;
  const auto out = cmd_eval(*fx.session, {std::nullopt, std::nullopt, BaseDetector::kZeroShot});
  ASSERT_EQ(out.failures.size(), 1u);
  EXPECT_EQ(out.failures[0].class_name, "toothbrush");
  EXPECT_EQ(out.failures[0].message.rfind("all-normal test set", 0), 0u);
  EXPECT_EQ(out.reports.size(), 2u + 4u);
  const auto j = out.to_json();
  EXPECT_EQ(j.at("errors").size(), 1u);
  EXPECT_EQ(j.at("reports").size(), 6u);
  EXPECT_NE(out.render().find("error\ttoothbrush\tdefective\tall-normal test set"),
            std::string::npos);
}

TEST(Eval, CombinedImagesNeverScored) {
  MvtecFixture fx;
  const auto out = cmd_eval(*fx.session, {"cable", "cable_swap", BaseDetector::kZeroShot});
  ASSERT_EQ(out.reports.size(), 1u);
  for (const auto& s : out.reports[0].scores) {
    EXPECT_EQ(s.image_id.find("combined"), std::string::npos);
  }
  EXPECT_EQ(out.reports[0].scores.size(), 6u);
}

TEST(Eval, MissingDetectorIsAPerClassFailure) {
  MvtecFixture fx;
  const auto out = cmd_eval(*fx.session, {"carpet", std::nullopt, BaseDetector::kBank});
  ASSERT_EQ(out.failures.size(), 1u);
  EXPECT_NE(out.failures[0].message.find("build-bank"), std::string::npos);
  EXPECT_TRUE(out.reports.empty());
}

TEST(Eval, SyntheticSmokeRunIsFastAndReproducible) {
  SyntheticFixture fx;
  const auto ws = fx.workspace();
  const auto t0 = std::chrono::steady_clock::now();
  cmd_ingest(*ws);
  const auto a = cmd_eval(*Session::open(ws), {"widget", std::nullopt, BaseDetector::kZeroShot});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(seconds, 60.0);
  ASSERT_TRUE(a.ok());
  ASSERT_EQ(a.reports.size(), 2u);
  const auto b = cmd_eval(*Session::open(ws), {"widget", std::nullopt, BaseDetector::kZeroShot});
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  // The planted group gains; its own scenario starts near chance.
  const auto& scuff = a.reports[1];
  EXPECT_EQ(scuff.group, "scuff");
  EXPECT_LT(scuff.auroc_before, 0.65);
  EXPECT_GE(scuff.auroc_after, 0.95);
}

// ---- preview --------------------------------------------------------------------------

TEST(Preview, MapsAndScores) {
  SyntheticFixture fx;
  const auto ws = fx.workspace();
  cmd_ingest(*ws);
  const auto session = Session::open(ws);
  const auto r =
      cmd_preview(*session, "widget", "test/scuff/003", "scuff", BaseDetector::kZeroShot);
  EXPECT_LT(r.score_after, r.score_before);
  EXPECT_EQ(r.map_sup.grid.size(), (MapSize{256, 256}));
  EXPECT_EQ(r.map_after.grid.size(), r.map_before.grid.size());
  const auto j = r.to_json();
  EXPECT_EQ(j.at("map_before").at("max"), r.score_before);
  EXPECT_EQ(j.at("map_after").at("max"), r.score_after);
  EXPECT_FALSE(j.at("map_sup").at("data").get<std::string>().empty());
  EXPECT_EQ(j.at("phrases").size(), 3u);

  const auto again =
      cmd_preview(*session, "widget", "test/scuff/003", "scuff", BaseDetector::kZeroShot);
  EXPECT_EQ(again.to_json().dump(), j.dump());

  EXPECT_THROW(cmd_preview(*session, "nope", "test/scuff/003", "scuff", BaseDetector::kZeroShot),
               NotFound);
  EXPECT_THROW(cmd_preview(*session, "widget", "test/scuff/999", "scuff", BaseDetector::kZeroShot),
               NotFound);
  EXPECT_THROW(cmd_preview(*session, "widget", "test/scuff/003", "  ", BaseDetector::kZeroShot),
               InvalidArgument);
}

}  // namespace
}  // namespace normadd::service

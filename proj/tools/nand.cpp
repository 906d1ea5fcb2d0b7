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

// nand: command-line front end for normality addition.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "normadd/errors.hpp"
#include "normadd/png.hpp"
#include "normadd/service/commands.hpp"
#include "normadd/service/server.hpp"

namespace fs = std::filesystem;
using namespace normadd;
using namespace normadd::service;

namespace {

struct Options {
  std::optional<std::string> config;
  std::string log_level = "info";

  std::uint64_t seed = 0;
  std::string out;
  std::string class_name;
  std::optional<std::string> eval_class;
  std::optional<std::string> group;
  std::optional<std::string> detector;
  std::optional<double> fraction;
  std::optional<std::size_t> workers;
  std::string output;
  std::string image;
  std::string normality;
  std::optional<std::uint16_t> port;
  std::optional<std::string> host;
  std::string fixture_dir;
};

Config make_config(const Options& o) {
  return load_config(o.config ? std::optional<fs::path>(*o.config) : std::nullopt);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

int run_ingest(const Options& o) {
  const auto ws = Workspace::open(make_config(o));
  const auto s = cmd_ingest(*ws);
  std::cout << "encoded " << s.encoded << ", reused " << s.reused << ", regenerated "
            << s.regenerated << ", repaired " << s.repaired << ", removed " << s.removed
            << ", prompts " << s.prompts << "\n";
  return 0;
}

int run_encode_stub(const Options& o) {
  const auto ws = Workspace::open(make_config(o));
  const fs::path out = o.out.empty()
                           ? ws->cache().root / ("stub-" + std::to_string(o.seed))
                           : fs::path(o.out);
  const auto s = cmd_encode_stub(*ws, o.seed, out);
  std::cout << "wrote " << s.images << " image embeddings and " << s.prompts
            << " prompt embeddings to " << out.string() << "\n";
  return 0;
}

int run_build_bank(const Options& o) {
  const auto ws = Workspace::open(make_config(o));
  const auto e = cmd_build_bank(*ws, o.class_name, o.fraction.value_or(ws->config().bank_fraction));
  std::cout << o.class_name << ": " << e.source_count << " patches -> "
            << (ws->cache().root / e.file.path).string() << " (fraction " << e.fraction << ")\n";
  return 0;
}

int run_eval(const Options& o) {
  auto config = make_config(o);
  if (o.workers) config.eval_workers = *o.workers;
  const auto ws = Workspace::open(config);
  auto lock = CacheLock::acquire(ws->cache(), LockMode::kShared);
  const auto session = Session::open(ws);
  EvalRequest req{o.eval_class, o.group,
                  o.detector ? parse_detector(*o.detector) : ws->config().detector};
  const auto outcome = cmd_eval(*session, req);
  std::cout << outcome.render();
  const fs::path output =
      o.output.empty()
          ? ws->cache().root / "reports" /
                ("eval-" + o.eval_class.value_or("all") + (o.group ? "-" + *o.group : "") + "-" +
                 std::string(to_string(req.detector)) + ".json")
          : fs::path(o.output);
  write_text(output, outcome.to_json().dump(2) + "\n");
  for (const auto& f : outcome.failures) {
    spdlog::error("{}{}{}: {}", f.class_name, f.group.empty() ? "" : "/", f.group, f.message);
  }
  spdlog::info("report written to {}", output.string());
  return outcome.ok() ? 0 : 1;
}

int run_preview(const Options& o) {
  const auto ws = Workspace::open(make_config(o));
  auto lock = CacheLock::acquire(ws->cache(), LockMode::kShared);
  const auto session = Session::open(ws);
  const auto r = cmd_preview(*session, o.class_name, o.image, o.normality,
                             o.detector ? parse_detector(*o.detector) : ws->config().detector);
  std::cout << "score_before " << r.score_before << "\nscore_after " << r.score_after << "\n";
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    fs::create_directories(dir);
    auto save = [&](const ScoreGrid& g, const char* name) {
      const auto png = encode_png(quantize_map(g).image);
      write_text(dir / name, std::string(png.begin(), png.end()));
    };
    save(r.map_before.grid, "map_before.png");
    save(r.map_sup.grid, "map_sup.png");
    save(r.map_after.grid, "map_after.png");
    auto j = r.to_json();
    for (const char* k : {"map_before", "map_sup", "map_after"}) j[k].erase("data");
    write_text(dir / "preview.json", j.dump(2) + "\n");
  }
  return 0;
}

int run_serve(const Options& o) {
  auto config = make_config(o);
  if (o.port) config.service_port = *o.port;
  if (o.host) config.service_host = *o.host;
  const auto ws = Workspace::open(config);
  auto lock = CacheLock::acquire(ws->cache(), LockMode::kShared);
  const Service service(Session::open(ws));
  run_service(service, ws->config().service_host, ws->config().service_port);
  return 0;
}

int run_make_fixture(const Options& o) {
  const auto conf = cmd_make_fixture(o.fixture_dir);
  std::cout << "wrote synthetic fixture; config at " << conf.string() << "\n";
  return 0;
}

int run_show_config(const Options& o) {
  std::cout << make_config(o).dump();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nand: add text-described normality to anomaly detectors"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "key = value configuration file");
  app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off");

  int (*action)(const Options&) = nullptr;
  auto on = [&](CLI::App* sub, int (*fn)(const Options&)) {
    sub->callback([&action, fn] { action = fn; });
  };

  on(app.add_subcommand("ingest", "encode every dataset image into the cache"), run_ingest);

  auto* stub = app.add_subcommand("encode-stub", "write stub embeddings in adapter layout");
  stub->add_option("--seed", o.seed, "stub encoder seed")->required();
  stub->add_option("--out", o.out, "output directory (default <cache>/stub-<seed>)");
  on(stub, run_encode_stub);

  auto* bank = app.add_subcommand("build-bank", "build a class's feature bank from the cache");
  bank->add_option("--class", o.class_name, "class name")->required();
  bank->add_option("--fraction", o.fraction, "coreset fraction in (0, 1]");
  on(bank, run_build_bank);

  auto* eval = app.add_subcommand("eval", "before/after AUROC per anomaly group");
  eval->add_option("--class", o.eval_class, "class name (default: every class)");
  eval->add_option("--group", o.group, "anomaly group (default: every group)");
  eval->add_option("--detector", o.detector, "zs, bank or external")
      ->check(CLI::IsMember({"zs", "bank", "external"}));
  eval->add_option("--output", o.output, "JSON report path");
  eval->add_option("--workers", o.workers, "scoring threads (0: all cores)");
  on(eval, run_eval);

  auto* preview = app.add_subcommand("preview", "score one image with and without a normality");
  preview->add_option("--class", o.class_name, "class name")->required();
  preview->add_option("--image", o.image, "class-relative image id, e.g. test/cut/000")
      ->required();
  preview->add_option("--normality", o.normality, "normality text")->required();
  preview->add_option("--detector", o.detector, "zs, bank or external")
      ->check(CLI::IsMember({"zs", "bank", "external"}));
  preview->add_option("--out", o.out, "directory for map PNGs and preview.json");
  on(preview, run_preview);

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--port", o.port, "listen port");
  serve->add_option("--host", o.host, "listen address");
  on(serve, run_serve);

  auto* fixture = app.add_subcommand("make-fixture", "write a synthetic dataset and config");
  fixture->add_option("--dir", o.fixture_dir, "output directory")->required();
  on(fixture, run_make_fixture);

  on(app.add_subcommand("config", "print the effective configuration"), run_show_config);

  CLI11_PARSE(app, argc, argv);

  auto logger = spdlog::stderr_color_mt("nand");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(o.log_level));

  try {
    return action(o);
  } catch (const ConfigError& e) {
    spdlog::error("configuration: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

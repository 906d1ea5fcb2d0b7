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

#include "normadd/service/server.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>

#include "binary_io.hpp"
#include "normadd/errors.hpp"
#include "normadd/service/commands.hpp"

using nlohmann::json;

namespace normadd::service {

namespace {

constexpr BaseDetector kAllKinds[] = {BaseDetector::kZeroShot, BaseDetector::kBank,
                                      BaseDetector::kExternal};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  send_json(res, status, json{{"error", {{"code", code}, {"message", message}}}});
}

// Runs a handler and maps library exceptions onto error payloads.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const NotFound& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const InvalidArgument& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const ConfigError& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "bad_request", std::string("malformed request: ") + e.what());
    } catch (const ProtocolError& e) {
      send_error(res, 422, "protocol_error", e.what());
    } catch (const EncoderError& e) {
      send_error(res, 422, "encoder_error", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InvalidArgument("request body must be a JSON object");
  return j;
}

std::string required(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw InvalidArgument(std::string("missing string field '") + key + "'");
  }
  return body[key].get<std::string>();
}

BaseDetector detector_field(const json& body) {
  if (!body.contains("detector")) return BaseDetector::kZeroShot;
  try {
    return parse_detector(body.at("detector").get<std::string>());
  } catch (const ConfigError& e) {
    throw InvalidArgument(e.what());
  }
}

const ClassIndex& class_or_404(const DatasetIndex& index, const std::string& name) {
  try {
    return index.get(name);
  } catch (const ProtocolError& e) {
    throw NotFound(e.what());
  }
}

std::string content_type(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".bmp") return "image/bmp";
  if (ext == ".tif" || ext == ".tiff") return "image/tiff";
  return "application/octet-stream";
}

}  // namespace

Service::Service(std::shared_ptr<const Session> session) : session_(std::move(session)) {
  for (const auto& cls : session_->workspace().dataset().class_names()) {
    for (auto kind : kAllKinds) {
      try {
        detectors_.emplace(std::pair{cls, kind}, session_->base_detector(cls, kind));
      } catch (const Error& e) {
        unavailable_.emplace(std::pair{cls, kind}, e.what());
      }
    }
  }
}

std::shared_ptr<const Detector> Service::detector(const std::string& class_name,
                                                  BaseDetector kind) const {
  class_or_404(session_->workspace().dataset(), class_name);
  if (auto it = detectors_.find({class_name, kind}); it != detectors_.end()) return it->second;
  const auto why = unavailable_.find({class_name, kind});
  throw NotFound("detector '" + std::string(to_string(kind)) + "' is unavailable for class '" +
                 class_name + "'" + (why != unavailable_.end() ? ": " + why->second : ""));
}

void Service::mount(httplib::Server& server) const {
  const Session& session = *session_;
  const Workspace& ws = session.workspace();
  const DatasetIndex& index = ws.dataset();

  server.Get("/api/health", guarded([&](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200,
                         json{{"status", "ok"},
                              {"classes", index.classes.size()},
                              {"encoder", ws.fingerprint()}});
             }));

  server.Get("/api/classes", guarded([&](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, json{{"classes", index.class_names()}});
             }));

  server.Get(R"(/api/classes/([^/]+)/groups)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               const auto& ci = class_or_404(index, req.matches[1]);
               json groups = json::array();
               for (const auto& g : ci.groups) {
                 groups.push_back(
                     {{"name", g.name}, {"types", g.types}, {"normality", group_normality(g)}});
               }
               send_json(res, 200, json{{"class", ci.name}, {"groups", groups}});
             }));

  server.Get(R"(/api/classes/([^/]+)/images)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               const auto& ci = class_or_404(index, req.matches[1]);
               const auto split = req.has_param("split") ? req.get_param_value("split") : "test";
               if (split != "test" && split != "train") {
                 throw InvalidArgument("split must be test or train");
               }
               json images = json::array();
               for (const auto& img : split == "test" ? ci.test : ci.train_normal) {
                 images.push_back({{"id", img.id}, {"anomaly_type", img.anomaly_type}});
               }
               send_json(res, 200, json{{"class", ci.name}, {"split", split}, {"images", images}});
             }));

  server.Get(R"(/api/images/([^/]+)/(.+))",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               const auto& img = find_image(index, req.matches[1], req.matches[2]);
               const auto bytes = detail::read_file_bytes(img.path);
               res.set_content(std::string(bytes.begin(), bytes.end()), content_type(img.path));
             }));

  server.Post("/api/preview", guarded([this, &session](const httplib::Request& req,
                                                       httplib::Response& res) {
                const auto body = parse_body(req);
                const auto cls = required(body, "class");
                const auto image_id = required(body, "image_id");
                const auto text = required(body, "normality_text");
                find_image(session.workspace().dataset(), cls, image_id);
                const auto base = detector(cls, detector_field(body));
                send_json(res, 200, cmd_preview(session, base, cls, image_id, text).to_json());
              }));

  server.Post("/api/evaluate", guarded([this, &session, &ws, &index](
                                           const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                const auto cls = required(body, "class");
                const auto group_name = required(body, "group");
                const auto& ci = class_or_404(index, cls);
                const auto& group = ci.group(group_name);
                const auto base = detector(cls, detector_field(body));
                const auto scenario = build_scenario(index, cls, group.name);
                const auto suppressed = session.add(base, ws.normality(cls, group_normality(group)));
                const auto report = run_before_after(*base, *suppressed, scenario, session.encoder(),
                                                     ws.config().eval_workers);
                send_json(res, 200, to_json(report));
              }));

  // SO_REUSEADDR only: the library default adds SO_REUSEPORT, which would let
  // a second instance share a busy port instead of failing to bind.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info("{} {} -> {}", req.method, req.path, res.status);
  });
}

void run_service(const Service& service, const std::string& host, std::uint16_t port) {
  httplib::Server server;
  service.mount(server);
  if (!server.bind_to_port(host, port)) {
    throw Error("cannot listen on " + host + ":" + std::to_string(port) +
                " (port busy or address unavailable)");
  }
  spdlog::info("serving on http://{}:{}", host, port);
  server.listen_after_bind();
}

}  // namespace normadd::service

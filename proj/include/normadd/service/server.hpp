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

// HTTP service over a cache Session.
//
// All bodies are JSON. Errors are {"error": {"code": ..., "message": ...}}
// with code not_found (404), bad_request (400), protocol_error and
// encoder_error (422) or internal (500).
//
//   GET  /api/health
//   GET  /api/classes
//   GET  /api/classes/{class}/groups
//   GET  /api/classes/{class}/images?split=test|train
//   GET  /api/images/{class}/{id}            original image bytes
//   POST /api/preview   {class, image_id, normality_text, detector}
//   POST /api/evaluate  {class, group, detector}
//
// Base detectors are built once at construction for every class and every
// detector kind whose cache entries exist. Requests only read that snapshot.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>

#include "httplib.h"
#include "normadd/service/workspace.hpp"

namespace normadd::service {

class Service {
 public:
  explicit Service(std::shared_ptr<const Session> session);

  /// Registers the routes, request logging and socket options on `server`.
  void mount(httplib::Server& server) const;

  /// Throws NotFound when the kind is unavailable for the class.
  std::shared_ptr<const Detector> detector(const std::string& class_name,
                                           BaseDetector kind) const;

  const Session& session() const noexcept { return *session_; }

 private:
  std::shared_ptr<const Session> session_;
  std::map<std::pair<std::string, BaseDetector>, std::shared_ptr<const Detector>> detectors_;
  std::map<std::pair<std::string, BaseDetector>, std::string> unavailable_;
};

/// Binds host:port and serves until the process ends. Throws Error when the
/// port cannot be bound.
void run_service(const Service& service, const std::string& host, std::uint16_t port);

}  // namespace normadd::service

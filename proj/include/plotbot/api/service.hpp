// Copyright 2026 The plotbot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "plotbot/api/accounts.hpp"
#include "plotbot/api/stream.hpp"
#include "plotbot/error.hpp"
#include "plotbot/garden/garden.hpp"
#include "plotbot/sched/weather.hpp"

namespace plotbot::api {

struct ApiConfig {
  std::chrono::seconds session_ttl{8 * 3600};
  int login_max_failures = 5;
  std::chrono::seconds login_window{60};
  std::chrono::hours weather_window{24};
  int render_mm_per_px = 10;
};

struct Request {
  std::string method;
  std::string path;  // without query string
  std::map<std::string, std::string> query;
  std::string token;  // bearer token, empty if none
  std::string body;
};

struct Response {
  Response() = default;
  Response(int s, nlohmann::json b) : status(s), body(std::move(b)) {}

  int status = 200;
  nlohmann::json body;
  // Set for binary payloads (rendered frames); body is ignored then.
  std::optional<std::string> raw;
  std::string content_type = "application/json";
};

int http_status(ErrorCode code) noexcept;
Response error_response(const Error& e);

// Transport-independent endpoint catalog under /api/v1. The HTTP server and
// the tests both go through handle().
class ApiService {
 public:
  ApiService(garden::Garden& garden, StreamHub& hub, std::shared_ptr<sched::WeatherService> weather,
             ApiConfig config = {}, WallClock wall = std::chrono::steady_clock::now);

  Response handle(const Request& req);

  // Resolves the session for the stream endpoint. Throws Unauthenticated.
  std::string authenticate(const std::string& token);
  StreamHub& hub() { return hub_; }
  SessionStore& sessions() { return sessions_; }

 private:
  Response route(const Request& req);

  Response login(const Request& req);
  Response logout(const Request& req, const std::string& user);
  Response field_view(const Request& req, const std::string& user);
  Response render(const Request& req);
  Response submit(const Request& req, const std::string& user);
  Response task(tasks::TaskId id);
  Response cancel(tasks::TaskId id, const std::string& user);
  Response queue();
  Response timeline(const Request& req);
  Response timelapse(const Request& req);
  Response timelapse_frame(const Request& req, std::size_t index);
  Response chat_history(const Request& req);
  Response chat_post(const Request& req, const std::string& user);
  Response weather();
  Response mode_get(const std::string& user);
  Response mode_put(const Request& req, const std::string& user);
  Response feedback(const Request& req, const std::string& user);
  Response remove_plant(field::PlantId id, const std::string& user);
  Response users();
  Response state();

  garden::Garden& garden_;
  StreamHub& hub_;
  std::shared_ptr<sched::WeatherService> weather_;
  ApiConfig config_;
  SessionStore sessions_;
  LoginLimiter limiter_;
};

}  // namespace plotbot::api

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

#include <atomic>
#include <chrono>
#include <memory>
#include <string>

#include "plotbot/api/service.hpp"

namespace httplib {
class Server;
}

namespace plotbot::api {

struct HttpConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::chrono::milliseconds keepalive{15000};
  std::string static_dir;  // optional web client files
};

// httplib front end. JSON endpoints map 1:1 onto ApiService; the stream is
// GET /api/v1/stream?topics=a,b&cursor=N as text/event-stream.
class HttpServer {
 public:
  HttpServer(ApiService& service, HttpConfig config);
  ~HttpServer();

  // Binds; returns the bound port (useful with port 0).
  int bind();
  // Blocks until stop().
  void listen();
  void stop();

 private:
  ApiService& service_;
  HttpConfig config_;
  std::unique_ptr<httplib::Server> server_;
  std::atomic<bool> stopping_{false};
};

// One SSE frame.
std::string sse_frame(const StreamEvent& e);

}  // namespace plotbot::api

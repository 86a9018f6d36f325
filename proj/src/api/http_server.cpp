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

#include "plotbot/api/http_server.hpp"

#include <httplib.h>

#include <fmt/format.h>

namespace plotbot::api {

using nlohmann::json;

std::string sse_frame(const StreamEvent& e) {
  json data = e;
  return fmt::format("id: {}\nevent: {}\ndata: {}\n\n", e.seq, e.type, data.dump());
}

namespace {

Request to_request(const httplib::Request& r) {
  Request out;
  out.method = r.method;
  out.path = r.path;
  for (const auto& [k, v] : r.params) out.query[k] = v;
  const auto auth = r.get_header_value("Authorization");
  if (auth.rfind("Bearer ", 0) == 0) out.token = auth.substr(7);
  if (out.token.empty() && r.has_param("token")) out.token = r.get_param_value("token");  // EventSource cannot set headers
  out.body = r.body;
  return out;
}

void write(httplib::Response& res, const Response& r) {
  res.status = r.status;
  if (r.raw) {
    res.set_content(*r.raw, r.content_type.c_str());
  } else {
    res.set_content(r.body.dump(), "application/json");
  }
}

}  // namespace

HttpServer::HttpServer(ApiService& service, HttpConfig config)
    : service_(service), config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    write(res, service_.handle(to_request(req)));
  };
  s.Get(R"(/api/v1/stream)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = to_request(req);
    std::shared_ptr<Subscription> sub;
    try {
      service_.authenticate(r.token);
      std::optional<std::int64_t> cursor;
      auto last = req.get_header_value("Last-Event-ID");
      if (last.empty() && req.has_param("cursor")) last = req.get_param_value("cursor");
      if (!last.empty()) {
        try {
          cursor = std::stoll(last);
        } catch (const std::exception&) {
          throw Error(ErrorCode::kBadRequest, "cursor must be an integer");
        }
      }
      sub = service_.hub().subscribe(parse_topics(req.has_param("topics") ? req.get_param_value("topics") : ""), cursor);
    } catch (const Error& e) {
      write(res, error_response(e));
      return;
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, sub](std::size_t, httplib::DataSink& sink) {
      if (stopping_) return false;
      try {
        auto e = sub->next(config_.keepalive);
        const std::string chunk = e ? sse_frame(*e) : std::string(": keepalive\n\n");
        return sink.write(chunk.data(), chunk.size());
      } catch (const Error& e) {
        const auto body = error_response(e).body.dump();
        const auto chunk = fmt::format("event: error\ndata: {}\n\n", body);
        sink.write(chunk.data(), chunk.size());
        sink.done();
        return true;
      }
    });
  });
  s.Get(R"(/api/v1/.*)", forward);
  s.Post(R"(/api/v1/.*)", forward);
  s.Put(R"(/api/v1/.*)", forward);
  s.Delete(R"(/api/v1/.*)", forward);
  if (!config_.static_dir.empty()) s.set_mount_point("/", config_.static_dir);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  if (config_.port == 0) return server_->bind_to_any_port(config_.host);
  if (!server_->bind_to_port(config_.host, config_.port))
    throw std::runtime_error(fmt::format("cannot bind {}:{}", config_.host, config_.port));
  return config_.port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
  stopping_ = true;
  service_.hub().close_all();
  if (server_) server_->stop();
}

}  // namespace plotbot::api

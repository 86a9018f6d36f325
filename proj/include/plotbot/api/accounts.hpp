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
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace plotbot::api {

// Argon2id cost. Tests and scenario fixtures use the minimum; the server
// defaults to libsodium's interactive preset.
struct HashCost {
  std::uint64_t ops = 0;
  std::size_t mem = 0;
  static HashCost interactive();
  static HashCost minimum();
};

// Encoded hash string (salt and parameters included).
std::string hash_password(const std::string& password, HashCost cost = HashCost::interactive());
bool verify_password(const std::string& encoded, const std::string& password);

using WallClock = std::function<std::chrono::steady_clock::time_point()>;

struct Session {
  std::string token;
  std::string user_id;
  std::chrono::steady_clock::time_point expires;
};

// Bearer tokens with a fixed TTL measured on the wall clock.
class SessionStore {
 public:
  explicit SessionStore(std::chrono::seconds ttl, WallClock clock = std::chrono::steady_clock::now);

  Session create(const std::string& user_id);
  // Throws Unauthenticated when unknown or expired; expired entries are dropped.
  Session check(const std::string& token);
  bool revoke(const std::string& token);
  std::chrono::seconds ttl() const { return ttl_; }
  std::size_t active() const;

 private:
  std::chrono::seconds ttl_;
  WallClock clock_;
  mutable std::mutex mu_;
  std::map<std::string, Session> sessions_;
};

// Sliding window over failed logins per user id.
class LoginLimiter {
 public:
  LoginLimiter(int max_failures, std::chrono::seconds window, WallClock clock = std::chrono::steady_clock::now);

  // Throws RateLimited with retry_after_s while the window is full.
  void check(const std::string& user_id);
  void failed(const std::string& user_id);
  void succeeded(const std::string& user_id);

 private:
  void prune(std::deque<std::chrono::steady_clock::time_point>& q, std::chrono::steady_clock::time_point now) const;

  int max_failures_;
  std::chrono::seconds window_;
  WallClock clock_;
  std::mutex mu_;
  std::map<std::string, std::deque<std::chrono::steady_clock::time_point>> failures_;
};

}  // namespace plotbot::api

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

#include "plotbot/api/accounts.hpp"

#include <array>

#include <fmt/format.h>
#include <sodium.h>

#include "plotbot/error.hpp"

namespace plotbot::api {

namespace {

void init_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium failed to initialize");
}

std::string random_token() {
  init_sodium();
  std::array<unsigned char, 24> raw{};
  randombytes_buf(raw.data(), raw.size());
  std::array<char, raw.size() * 2 + 1> hex{};
  sodium_bin2hex(hex.data(), hex.size(), raw.data(), raw.size());
  return std::string(hex.data());
}

}  // namespace

HashCost HashCost::interactive() {
  return {crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE};
}

HashCost HashCost::minimum() { return {crypto_pwhash_OPSLIMIT_MIN, crypto_pwhash_MEMLIMIT_MIN}; }

std::string hash_password(const std::string& password, HashCost cost) {
  init_sodium();
  std::array<char, crypto_pwhash_STRBYTES> out{};
  if (crypto_pwhash_str(out.data(), password.data(), password.size(), cost.ops, cost.mem) != 0)
    throw std::runtime_error("password hashing ran out of memory");
  return std::string(out.data());
}

bool verify_password(const std::string& encoded, const std::string& password) {
  init_sodium();
  if (encoded.empty()) return false;
  return crypto_pwhash_str_verify(encoded.c_str(), password.data(), password.size()) == 0;
}

SessionStore::SessionStore(std::chrono::seconds ttl, WallClock clock) : ttl_(ttl), clock_(std::move(clock)) {
  if (ttl_ <= std::chrono::seconds::zero()) throw Error(ErrorCode::kInvalidConfig, "session ttl must be positive");
}

Session SessionStore::create(const std::string& user_id) {
  Session s{random_token(), user_id, clock_() + ttl_};
  std::lock_guard lock(mu_);
  sessions_[s.token] = s;
  return s;
}

Session SessionStore::check(const std::string& token) {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(token);
  if (it == sessions_.end()) throw Error(ErrorCode::kUnauthenticated, "missing or unknown session token");
  if (clock_() >= it->second.expires) {
    const auto user = it->second.user_id;
    sessions_.erase(it);
    throw Error(ErrorCode::kUnauthenticated, "session expired", {{"expired_user_id", user}});
  }
  return it->second;
}

bool SessionStore::revoke(const std::string& token) {
  std::lock_guard lock(mu_);
  return sessions_.erase(token) > 0;
}

std::size_t SessionStore::active() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

LoginLimiter::LoginLimiter(int max_failures, std::chrono::seconds window, WallClock clock)
    : max_failures_(max_failures), window_(window), clock_(std::move(clock)) {}

void LoginLimiter::prune(std::deque<std::chrono::steady_clock::time_point>& q,
                         std::chrono::steady_clock::time_point now) const {
  while (!q.empty() && now - q.front() >= window_) q.pop_front();
}

void LoginLimiter::check(const std::string& user_id) {
  std::lock_guard lock(mu_);
  auto& q = failures_[user_id];
  const auto now = clock_();
  prune(q, now);
  if (static_cast<int>(q.size()) >= max_failures_) {
    const auto retry = std::chrono::duration_cast<std::chrono::seconds>(q.front() + window_ - now).count() + 1;
    throw Error(ErrorCode::kRateLimited, fmt::format("too many failed logins; retry in {} s", retry),
                {{"retry_after_s", retry}});
  }
}

void LoginLimiter::failed(const std::string& user_id) {
  std::lock_guard lock(mu_);
  failures_[user_id].push_back(clock_());
}

void LoginLimiter::succeeded(const std::string& user_id) {
  std::lock_guard lock(mu_);
  failures_.erase(user_id);
}

}  // namespace plotbot::api

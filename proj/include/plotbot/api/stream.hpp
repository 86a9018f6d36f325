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
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/garden/garden.hpp"

namespace plotbot::api {

struct StreamEvent {
  std::int64_t seq = 0;
  std::string topic;
  std::string type;
  Timestamp at{};
  nlohmann::json data;
};

void to_json(nlohmann::json& j, const StreamEvent& e);
void from_json(const nlohmann::json& j, StreamEvent& e);

std::set<std::string> parse_topics(const std::string& csv);  // empty or "all" -> every topic

class StreamHub;

// Per-client cursor with a bounded buffer. A client that falls more than
// `buffer` events behind is dropped; it reconnects with cursor().
class Subscription {
 public:
  // Next event, or nullopt after `wait` without one (keepalive).
  // Throws SlowConsumer once dropped, CursorExpired if the hub closed it.
  std::optional<StreamEvent> next(std::chrono::milliseconds wait);
  std::vector<StreamEvent> drain();
  std::int64_t cursor() const;
  bool dropped() const;
  ~Subscription();

 private:
  friend class StreamHub;
  Subscription(StreamHub* hub, std::set<std::string> topics, std::size_t buffer, std::int64_t cursor);
  bool wants(const std::string& topic) const { return topics_.empty() || topics_.contains(topic); }
  void offer(const StreamEvent& e);  // hub lock held

  StreamHub* hub_;
  std::set<std::string> topics_;
  std::size_t buffer_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<StreamEvent> pending_;
  std::int64_t cursor_;
  bool dropped_ = false;
  bool closed_ = false;
};

// Numbers every delta and keeps a bounded history for resume.
class StreamHub : public garden::EventSink {
 public:
  explicit StreamHub(std::size_t history = 65536, std::size_t client_buffer = 4096);
  ~StreamHub() override;

  void publish(const garden::Delta& delta) override;
  std::int64_t last_seq() const;

  // Resumes after `cursor` (0 = from now). Throws CursorExpired when the
  // gap is no longer in the history.
  std::shared_ptr<Subscription> subscribe(std::set<std::string> topics, std::optional<std::int64_t> cursor);
  std::vector<StreamEvent> history_after(std::int64_t cursor) const;
  void close_all();

 private:
  friend class Subscription;
  void detach(Subscription* s);

  std::size_t history_cap_;
  std::size_t client_buffer_;
  mutable std::mutex mu_;
  std::deque<StreamEvent> history_;
  std::int64_t seq_ = 0;
  std::set<Subscription*> subs_;
};

// The polled projection that the stream keeps current: gantry, plants,
// weeds, queue, timeline, chat.
nlohmann::json live_document(const garden::GardenState& state, std::int64_t cursor);

// Client-side fold: a live_document plus later events.
class StreamMirror {
 public:
  explicit StreamMirror(const nlohmann::json& document);
  void apply(const StreamEvent& e);
  nlohmann::json document() const;
  std::int64_t cursor() const { return cursor_; }

 private:
  std::int64_t cursor_ = 0;
  nlohmann::json gantry_;
  int day_ = 0;
  std::map<std::int64_t, nlohmann::json> plants_;
  std::map<std::int64_t, nlohmann::json> weeds_;
  std::map<std::int64_t, nlohmann::json> queue_;
  std::vector<nlohmann::json> timeline_;
  std::vector<nlohmann::json> chat_;
};

}  // namespace plotbot::api

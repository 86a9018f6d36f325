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

#include "plotbot/api/stream.hpp"

#include <sstream>

#include <fmt/format.h>

#include "plotbot/error.hpp"

namespace plotbot::api {

using nlohmann::json;

void to_json(json& j, const StreamEvent& e) {
  j = {{"seq", e.seq}, {"topic", e.topic}, {"type", e.type}, {"at_us", to_micros(e.at)}, {"data", e.data}};
}

void from_json(const json& j, StreamEvent& e) {
  e.seq = j.at("seq").get<std::int64_t>();
  e.topic = j.at("topic").get<std::string>();
  e.type = j.at("type").get<std::string>();
  e.at = from_micros(j.at("at_us").get<std::int64_t>());
  e.data = j.at("data");
}

std::set<std::string> parse_topics(const std::string& csv) {
  static const std::set<std::string> known{"field", "queue", "timeline", "chat"};
  std::set<std::string> out;
  std::stringstream in(csv);
  std::string t;
  while (std::getline(in, t, ',')) {
    if (t.empty() || t == "all") continue;
    if (!known.contains(t)) throw Error(ErrorCode::kBadRequest, fmt::format("unknown stream topic '{}'", t));
    out.insert(t);
  }
  return out;
}

Subscription::Subscription(StreamHub* hub, std::set<std::string> topics, std::size_t buffer, std::int64_t cursor)
    : hub_(hub), topics_(std::move(topics)), buffer_(buffer), cursor_(cursor) {}

Subscription::~Subscription() {
  StreamHub* hub = nullptr;
  {
    std::lock_guard lock(mu_);
    hub = hub_;
  }
  if (hub) hub->detach(this);
}

void Subscription::offer(const StreamEvent& e) {
  std::lock_guard lock(mu_);
  if (dropped_ || closed_) return;
  if (pending_.size() >= buffer_) {
    dropped_ = true;
  } else {
    pending_.push_back(e);
  }
  cv_.notify_all();
}

std::optional<StreamEvent> Subscription::next(std::chrono::milliseconds wait) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, wait, [&] { return !pending_.empty() || dropped_ || closed_; });
  if (!pending_.empty()) {
    auto e = std::move(pending_.front());
    pending_.pop_front();
    cursor_ = e.seq;
    return e;
  }
  if (dropped_)
    throw Error(ErrorCode::kSlowConsumer, "stream buffer overflowed; reconnect with the cursor", {{"cursor", cursor_}});
  if (closed_) throw Error(ErrorCode::kCursorExpired, "stream closed by the server", {{"cursor", cursor_}});
  return std::nullopt;
}

std::vector<StreamEvent> Subscription::drain() {
  std::vector<StreamEvent> out;
  while (auto e = next(std::chrono::milliseconds(0))) out.push_back(std::move(*e));
  return out;
}

std::int64_t Subscription::cursor() const {
  std::lock_guard lock(mu_);
  return cursor_;
}

bool Subscription::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

StreamHub::StreamHub(std::size_t history, std::size_t client_buffer)
    : history_cap_(history), client_buffer_(client_buffer) {}

StreamHub::~StreamHub() { close_all(); }

void StreamHub::publish(const garden::Delta& delta) {
  std::lock_guard lock(mu_);
  StreamEvent e{++seq_, delta.topic, delta.type, delta.at, delta.data};
  history_.push_back(e);
  if (history_.size() > history_cap_) history_.pop_front();
  for (auto* s : subs_)
    if (s->wants(e.topic)) s->offer(e);
}

std::int64_t StreamHub::last_seq() const {
  std::lock_guard lock(mu_);
  return seq_;
}

std::shared_ptr<Subscription> StreamHub::subscribe(std::set<std::string> topics, std::optional<std::int64_t> cursor) {
  std::lock_guard lock(mu_);
  const std::int64_t from = cursor.value_or(seq_);
  if (from > seq_ || from < 0)
    throw Error(ErrorCode::kCursorExpired, fmt::format("cursor {} is ahead of the stream ({})", from, seq_),
                {{"cursor", from}, {"last_seq", seq_}});
  const std::int64_t oldest = history_.empty() ? seq_ + 1 : history_.front().seq;
  if (from + 1 < oldest)
    throw Error(ErrorCode::kCursorExpired, fmt::format("cursor {} is older than the retained history", from),
                {{"cursor", from}, {"oldest", oldest}});
  std::shared_ptr<Subscription> sub(new Subscription(this, std::move(topics), client_buffer_, from));
  for (const auto& e : history_)
    if (e.seq > from && sub->wants(e.topic)) sub->offer(e);
  subs_.insert(sub.get());
  return sub;
}

std::vector<StreamEvent> StreamHub::history_after(std::int64_t cursor) const {
  std::lock_guard lock(mu_);
  std::vector<StreamEvent> out;
  for (const auto& e : history_)
    if (e.seq > cursor) out.push_back(e);
  return out;
}

void StreamHub::close_all() {
  std::lock_guard lock(mu_);
  for (auto* s : subs_) {
    std::lock_guard sl(s->mu_);
    s->closed_ = true;
    s->hub_ = nullptr;
    s->cv_.notify_all();
  }
  subs_.clear();
}

void StreamHub::detach(Subscription* s) {
  std::lock_guard lock(mu_);
  subs_.erase(s);
}

json live_document(const garden::GardenState& state, std::int64_t cursor) {
  json plants = json::array();
  for (const auto& [id, p] : state.field.plants) plants.push_back(garden::plant_view(p));
  json weeds = json::array();
  for (const auto& [id, w] : state.field.weeds) weeds.push_back(garden::weed_view(w));
  json queue = json::array();
  for (const auto& [id, e] : state.queue.entries()) queue.push_back(e);
  json timeline = json::array();
  for (const auto& e : state.timeline.events()) timeline.push_back(e);
  return {{"cursor", cursor},
          {"day", state.day},
          {"gantry", state.gantry},
          {"plants", plants},
          {"weeds", weeds},
          {"queue", queue},
          {"timeline", timeline},
          {"chat", state.chat}};
}

StreamMirror::StreamMirror(const json& doc)
    : cursor_(doc.at("cursor").get<std::int64_t>()), gantry_(doc.at("gantry")), day_(doc.at("day").get<int>()) {
  for (const auto& p : doc.at("plants")) plants_[p.at("id").get<std::int64_t>()] = p;
  for (const auto& w : doc.at("weeds")) weeds_[w.at("id").get<std::int64_t>()] = w;
  for (const auto& e : doc.at("queue")) queue_[e.at("task").at("id").get<std::int64_t>()] = e;
  timeline_ = doc.at("timeline").get<std::vector<json>>();
  chat_ = doc.at("chat").get<std::vector<json>>();
}

void StreamMirror::apply(const StreamEvent& e) {
  if (e.seq <= cursor_) return;  // already folded into the document
  if (e.seq != cursor_ + 1)
    throw Error(ErrorCode::kCursorExpired, fmt::format("gap in stream: expected {}, got {}", cursor_ + 1, e.seq));
  cursor_ = e.seq;
  const auto& d = e.data;
  if (e.type == "gantry") {
    gantry_ = d.at("state");
  } else if (e.type == "plant") {
    plants_[d.at("plant").at("id").get<std::int64_t>()] = d.at("plant");
  } else if (e.type == "weed_added") {
    weeds_[d.at("weed").at("id").get<std::int64_t>()] = d.at("weed");
  } else if (e.type == "weed_removed") {
    weeds_.erase(d.at("id").get<std::int64_t>());
  } else if (e.type == "day_started") {
    day_ = d.at("day").get<int>();
  } else if (e.type == "entry") {
    queue_[d.at("entry").at("task").at("id").get<std::int64_t>()] = d.at("entry");
  } else if (e.topic == "timeline") {
    timeline_.push_back(d);
  } else if (e.topic == "chat") {
    chat_.push_back(d);
  }
}

json StreamMirror::document() const {
  json plants = json::array();
  for (const auto& [id, p] : plants_) plants.push_back(p);
  json weeds = json::array();
  for (const auto& [id, w] : weeds_) weeds.push_back(w);
  json queue = json::array();
  for (const auto& [id, e] : queue_) queue.push_back(e);
  return {{"cursor", cursor_}, {"day", day_},        {"gantry", gantry_}, {"plants", plants},
          {"weeds", weeds},    {"queue", queue},     {"timeline", timeline_}, {"chat", chat_}};
}

}  // namespace plotbot::api

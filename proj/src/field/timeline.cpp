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

#include "plotbot/field/timeline.hpp"

#include <algorithm>

namespace plotbot::field {

namespace {

constexpr EventKind kKinds[] = {EventKind::sow,   EventKind::water,       EventKind::weed,
                                EventKind::scan,  EventKind::moisture_read, EventKind::mode_switch,
                                EventKind::login, EventKind::logout,      EventKind::system};

}  // namespace

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::sow: return "sow";
    case EventKind::water: return "water";
    case EventKind::weed: return "weed";
    case EventKind::scan: return "scan";
    case EventKind::moisture_read: return "moisture_read";
    case EventKind::mode_switch: return "mode_switch";
    case EventKind::login: return "login";
    case EventKind::logout: return "logout";
    case EventKind::system: return "system";
  }
  return "system";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) noexcept {
  for (const auto k : kKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::int64_t Timeline::append(TimelineEvent event) {
  event.id = last_id() + 1;
  events_.push_back(std::move(event));
  return events_.back().id;
}

TimelinePage Timeline::query(const TimelineFilter& f) const {
  TimelinePage page;
  const auto start = std::upper_bound(events_.begin(), events_.end(), f.after_id,
                                      [](std::int64_t id, const TimelineEvent& e) { return id < e.id; });
  for (auto it = start; it != events_.end(); ++it) {
    const auto& e = *it;
    if (f.actor && e.actor != *f.actor) continue;
    if (f.plot_id && e.plot_id != f.plot_id) continue;
    if (f.kind && e.kind != *f.kind) continue;
    if (f.from && e.timestamp < *f.from) continue;
    if (f.to && e.timestamp >= *f.to) continue;
    if (page.events.size() == f.limit) {
      page.next_after = page.events.back().id;
      break;
    }
    page.events.push_back(e);
  }
  return page;
}

void Timeline::export_jsonl(std::ostream& out) const {
  for (const auto& e : events_) out << nlohmann::json(e).dump() << '\n';
}

void to_json(nlohmann::json& j, const TimelineEvent& e) {
  j = {{"id", e.id},
       {"timestamp", format_iso8601(e.timestamp)},
       {"timestamp_us", to_micros(e.timestamp)},
       {"actor", e.actor},
       {"kind", to_string(e.kind)},
       {"status", e.status},
       {"payload", e.payload}};
  j["plot_id"] = e.plot_id ? nlohmann::json(*e.plot_id) : nlohmann::json(nullptr);
  j["task_id"] = e.task_id ? nlohmann::json(*e.task_id) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, TimelineEvent& e) {
  e.id = j.at("id").get<std::int64_t>();
  e.timestamp = from_micros(j.at("timestamp_us").get<std::int64_t>());
  e.actor = j.at("actor").get<std::string>();
  e.kind = event_kind_from_string(j.at("kind").get<std::string>()).value_or(EventKind::system);
  e.status = j.at("status").get<std::string>();
  e.payload = j.at("payload");
  e.plot_id = j.at("plot_id").is_null() ? std::nullopt : std::optional<int>(j.at("plot_id").get<int>());
  e.task_id = j.at("task_id").is_null() ? std::nullopt : std::optional<TaskId>(j.at("task_id").get<TaskId>());
}

}  // namespace plotbot::field

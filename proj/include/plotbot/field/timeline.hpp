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

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/field/field_state.hpp"
#include "plotbot/time.hpp"

namespace plotbot::field {

enum class EventKind { sow, water, weed, scan, moisture_read, mode_switch, login, logout, system };

std::string_view to_string(EventKind k) noexcept;
std::optional<EventKind> event_kind_from_string(std::string_view s) noexcept;

// Visibility is always global: every gardener sees every event.
struct TimelineEvent {
  std::int64_t id = 0;
  Timestamp timestamp{};
  std::string actor;  // user id or "robot"
  EventKind kind = EventKind::system;
  std::optional<int> plot_id;
  std::optional<TaskId> task_id;
  std::string status;  // "done" / "failed" for task events, empty otherwise
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const TimelineEvent&) const = default;
};

struct TimelineFilter {
  std::optional<std::string> actor;
  std::optional<int> plot_id;
  std::optional<EventKind> kind;
  std::optional<Timestamp> from;  // inclusive
  std::optional<Timestamp> to;    // exclusive
  std::int64_t after_id = 0;
  std::size_t limit = 100;
};

struct TimelinePage {
  std::vector<TimelineEvent> events;
  std::optional<std::int64_t> next_after;  // set when more events match
};

// Append-only, ids strictly increasing from 1.
class Timeline {
 public:
  std::int64_t append(TimelineEvent event);
  TimelinePage query(const TimelineFilter& filter) const;
  const std::vector<TimelineEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  std::int64_t last_id() const { return events_.empty() ? 0 : events_.back().id; }

  // One JSON object per line.
  void export_jsonl(std::ostream& out) const;

  bool operator==(const Timeline&) const = default;

 private:
  std::vector<TimelineEvent> events_;
};

void to_json(nlohmann::json& j, const TimelineEvent& e);
void from_json(const nlohmann::json& j, TimelineEvent& e);

}  // namespace plotbot::field

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

#include "plotbot/policy/modes.hpp"

#include <algorithm>
#include <array>

#include "plotbot/error.hpp"

namespace plotbot::policy {

std::string_view to_string(ControlMode m) noexcept {
  switch (m) {
    case ControlMode::manual: return "manual";
    case ControlMode::hybrid: return "hybrid";
    case ControlMode::automated: return "automated";
  }
  return "manual";
}

std::optional<ControlMode> mode_from_string(std::string_view s) noexcept {
  if (s == "manual") return ControlMode::manual;
  if (s == "hybrid") return ControlMode::hybrid;
  if (s == "automated") return ControlMode::automated;
  return std::nullopt;
}

char mode_letter(ControlMode m) noexcept {
  switch (m) {
    case ControlMode::manual: return 'M';
    case ControlMode::hybrid: return 'H';
    case ControlMode::automated: return 'A';
  }
  return '?';
}

void ModeTable::add_user(const std::string& user_id, ControlMode initial, Timestamp at) {
  if (current_.contains(user_id)) throw Error(ErrorCode::kInvalidArgument, "user '" + user_id + "' already registered");
  initial_[user_id] = initial;
  registered_at_[user_id] = at;
  current_[user_id] = initial;
}

bool ModeTable::has_user(std::string_view user_id) const { return current_.find(user_id) != current_.end(); }

ModeChange ModeTable::switch_mode(const std::string& user_id, ControlMode new_mode, Timestamp at) {
  const auto it = current_.find(user_id);
  if (it == current_.end()) throw Error(ErrorCode::kUnknownUser, "unknown user '" + user_id + "'");
  ModeChange change{at, user_id, it->second, new_mode};
  it->second = new_mode;
  log_.push_back(change);
  return change;
}

ControlMode ModeTable::mode_of(std::string_view user_id) const {
  const auto it = current_.find(user_id);
  if (it == current_.end()) throw Error(ErrorCode::kUnknownUser, "unknown user '" + std::string(user_id) + "'");
  return it->second;
}

std::map<std::string, std::vector<ControlMode>> mode_day_matrix(const ModeTable& table, Timestamp epoch, int days) {
  std::map<std::string, std::vector<ControlMode>> out;
  const Duration day = std::chrono::seconds(kSecondsPerDay);
  for (const auto& [user, initial] : table.initial()) {
    std::vector<const ModeChange*> changes;
    for (const auto& c : table.log())
      if (c.user_id == user) changes.push_back(&c);

    std::vector<ControlMode> row;
    row.reserve(static_cast<std::size_t>(std::max(days, 0)));
    ControlMode mode = initial;
    std::size_t next = 0;
    for (int d = 0; d < days; ++d) {
      const Timestamp start = epoch + d * day;
      const Timestamp end = start + day;
      // Apply everything before the day opens.
      while (next < changes.size() && changes[next]->at <= start) mode = changes[next++]->new_mode;
      std::array<Duration, 3> held{};
      Timestamp cursor = start;
      while (next < changes.size() && changes[next]->at < end) {
        held[static_cast<std::size_t>(mode)] += changes[next]->at - cursor;
        cursor = changes[next]->at;
        mode = changes[next++]->new_mode;
      }
      held[static_cast<std::size_t>(mode)] += end - cursor;
      ControlMode best = mode;
      for (ControlMode m : {ControlMode::manual, ControlMode::hybrid, ControlMode::automated}) {
        if (held[static_cast<std::size_t>(m)] > held[static_cast<std::size_t>(best)]) best = m;
      }
      row.push_back(best);
    }
    out.emplace(user, std::move(row));
  }
  return out;
}

void to_json(nlohmann::json& j, const ModeTable& t) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& [user, initial] : t.initial_) {
    users.push_back({{"user_id", user},
                     {"initial", to_string(initial)},
                     {"registered_at", to_micros(t.registered_at_.at(user))},
                     {"current", to_string(t.current_.at(user))}});
  }
  nlohmann::json log = nlohmann::json::array();
  for (const auto& c : t.log_) {
    log.push_back({{"at", to_micros(c.at)},
                   {"user_id", c.user_id},
                   {"old", to_string(c.old_mode)},
                   {"new", to_string(c.new_mode)}});
  }
  j = {{"users", users}, {"log", log}};
}

void from_json(const nlohmann::json& j, ModeTable& t) {
  t = ModeTable{};
  auto mode = [](const nlohmann::json& v) {
    const auto m = mode_from_string(v.get<std::string>());
    if (!m) throw Error(ErrorCode::kInvalidArgument, "bad mode " + v.dump());
    return *m;
  };
  for (const auto& u : j.at("users")) {
    const auto id = u.at("user_id").get<std::string>();
    t.initial_[id] = mode(u.at("initial"));
    t.registered_at_[id] = from_micros(u.at("registered_at").get<std::int64_t>());
    t.current_[id] = mode(u.at("current"));
  }
  for (const auto& c : j.at("log")) {
    t.log_.push_back({from_micros(c.at("at").get<std::int64_t>()), c.at("user_id").get<std::string>(),
                      mode(c.at("old")), mode(c.at("new"))});
  }
}

}  // namespace plotbot::policy

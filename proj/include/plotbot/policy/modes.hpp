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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/time.hpp"

namespace plotbot::policy {

enum class ControlMode { manual, hybrid, automated };

std::string_view to_string(ControlMode m) noexcept;
std::optional<ControlMode> mode_from_string(std::string_view s) noexcept;
// 'M', 'H', 'A' as used in mode-day matrices.
char mode_letter(ControlMode m) noexcept;

struct ModeChange {
  Timestamp at{};
  std::string user_id;
  ControlMode old_mode = ControlMode::manual;
  ControlMode new_mode = ControlMode::manual;
  bool operator==(const ModeChange&) const = default;
};

// Current mode per user plus an append-only change log. Not synchronized;
// the owning service serializes writers.
class ModeTable {
 public:
  void add_user(const std::string& user_id, ControlMode initial, Timestamp at);
  bool has_user(std::string_view user_id) const;

  // Throws Error(kUnknownUser). Switching to the current mode appends one
  // log entry with old == new and otherwise changes nothing.
  ModeChange switch_mode(const std::string& user_id, ControlMode new_mode, Timestamp at);

  ControlMode mode_of(std::string_view user_id) const;
  const std::map<std::string, ControlMode, std::less<>>& current() const { return current_; }
  const std::map<std::string, ControlMode, std::less<>>& initial() const { return initial_; }
  const std::vector<ModeChange>& log() const { return log_; }

  bool operator==(const ModeTable&) const = default;

  friend void to_json(nlohmann::json& j, const ModeTable& t);
  friend void from_json(const nlohmann::json& j, ModeTable& t);

 private:
  std::map<std::string, ControlMode, std::less<>> initial_;
  std::map<std::string, Timestamp, std::less<>> registered_at_;
  std::map<std::string, ControlMode, std::less<>> current_;
  std::vector<ModeChange> log_;
};

// Per user, per simulated day: the mode held for the largest share of that
// day (ties go to the mode active at the end of the day). Reconstructed
// purely from initial modes and the change log.
std::map<std::string, std::vector<ControlMode>> mode_day_matrix(const ModeTable& table, Timestamp epoch, int days);

}  // namespace plotbot::policy

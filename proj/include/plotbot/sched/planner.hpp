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

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/field/field_state.hpp"
#include "plotbot/policy/modes.hpp"
#include "plotbot/policy/species.hpp"
#include "plotbot/sched/weather.hpp"
#include "plotbot/tasks/task.hpp"

namespace plotbot::sched {

struct PlannerConfig {
  int run_hour = 6;
  // While it rains, plants whose soil holds at least this much are skipped.
  double suspend_threshold = 0.25;
  bool daily_scan = true;
};

struct PlannerUser {
  std::string user_id;
  int plot_id = 0;
  policy::ControlMode mode = policy::ControlMode::manual;
};

// Emits the automated day's tasks in a fixed order: per Automated user (in
// the given order) one Water for the plants below their species threshold
// and one Weed per weed mark in the plot, then the shared whole-field Scan.
// Task ids are left 0 for the caller to assign.
std::vector<tasks::TaskRequest> plan_automated_day(Timestamp now, const WeatherSample& weather,
                                                   const field::FieldState& field,
                                                   const std::vector<PlannerUser>& users,
                                                   const policy::SpeciesCatalog& species,
                                                   const PlannerConfig& cfg);

// Remembers which days were planned so a repeated call for the same day
// yields nothing.
class PlannerDayGuard {
 public:
  bool claim(int day) { return days_.insert(day).second; }
  bool planned(int day) const { return days_.contains(day); }
  const std::set<int>& days() const { return days_; }
  void restore(std::set<int> days) { days_ = std::move(days); }
  bool operator==(const PlannerDayGuard&) const = default;

 private:
  std::set<int> days_;
};

void to_json(nlohmann::json& j, const PlannerConfig& c);
void from_json(const nlohmann::json& j, PlannerConfig& c);

}  // namespace plotbot::sched

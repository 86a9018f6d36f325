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

#include "plotbot/sched/planner.hpp"

namespace plotbot::sched {

std::vector<tasks::TaskRequest> plan_automated_day(Timestamp now, const WeatherSample& weather,
                                                   const field::FieldState& field,
                                                   const std::vector<PlannerUser>& users,
                                                   const policy::SpeciesCatalog& species,
                                                   const PlannerConfig& cfg) {
  std::vector<tasks::TaskRequest> out;
  const auto emit = [&](std::string user, tasks::TaskKind kind) {
    tasks::TaskRequest t;
    t.user_id = std::move(user);
    t.kind = std::move(kind);
    t.submitted_at = now;
    t.origin = tasks::Origin::auto_planner;
    out.push_back(std::move(t));
  };

  for (const auto& u : users) {
    if (u.mode != policy::ControlMode::automated) continue;
    tasks::Water water;
    for (const auto* p : field.live_plants_of(u.user_id)) {
      const double m = field.moisture_at(p->position);
      if (m >= species.at(p->species_id).moisture_threshold) continue;
      if (weather.raining && m >= cfg.suspend_threshold) continue;
      water.plants.push_back(p->id);
    }
    if (!water.plants.empty()) emit(u.user_id, std::move(water));
    for (const auto& [id, w] : field.weeds)
      if (w.plot_id == u.plot_id) emit(u.user_id, tasks::Weed{w.position});
  }
  if (cfg.daily_scan) emit(std::string(tasks::kRobotActor), tasks::Scan{});
  return out;
}

void to_json(nlohmann::json& j, const PlannerConfig& c) {
  j = {{"run_hour", c.run_hour}, {"suspend_threshold", c.suspend_threshold}, {"daily_scan", c.daily_scan}};
}

void from_json(const nlohmann::json& j, PlannerConfig& c) {
  PlannerConfig d;
  c.run_hour = j.value("run_hour", d.run_hour);
  c.suspend_threshold = j.value("suspend_threshold", d.suspend_threshold);
  c.daily_scan = j.value("daily_scan", d.daily_scan);
}

}  // namespace plotbot::sched

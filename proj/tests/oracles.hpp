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

// Independent reimplementations used as test oracles. Deliberately naive:
// floating point distances, linear scans, no shared helpers with src/.

#include <algorithm>
#include <cmath>
#include <optional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "plotbot/error.hpp"
#include "plotbot/policy/validate.hpp"
#include "plotbot/sched/planner.hpp"
#include "plotbot/tasks/task.hpp"
#include "gen.hpp"

namespace oracle {

struct Expected {
  std::optional<plotbot::ErrorCode> error;
  plotbot::policy::Verdict verdict = plotbot::policy::Verdict::ok;
  std::set<std::string> rules;
};

inline bool inside(const plotbot::field::Plot& p, plotbot::Coord2 c) {
  return c.x_mm >= p.origin.x_mm && c.x_mm <= p.origin.x_mm + p.size_mm && c.y_mm >= p.origin.y_mm &&
         c.y_mm <= p.origin.y_mm + p.size_mm;
}

inline Expected mode_semantics(const plotbot::tasks::TaskRequest& task, plotbot::policy::ControlMode mode,
                               const plotbot::policy::ValidationContext& ctx) {
  using namespace plotbot;
  using policy::ControlMode;
  Expected out;
  const auto& plot = ctx.field.plots.at(static_cast<std::size_t>(ctx.user_plot));

  if (const auto* s = std::get_if<tasks::Sow>(&task.kind)) {
    if (!ctx.species.contains(s->species)) return {ErrorCode::kUnknownSpecies};
    if (s->target && !inside(plot, *s->target)) return {ErrorCode::kCrossPlotTarget};
  } else if (const auto* w = std::get_if<tasks::Water>(&task.kind)) {
    if (w->water_all_plot && *w->water_all_plot != ctx.user_plot) return {ErrorCode::kCrossPlotTarget};
    if (w->plants.empty()) return {ErrorCode::kEmptyTargetList};
    for (const auto id : w->plants) {
      if (!ctx.field.plants.contains(id)) return {ErrorCode::kUnknownPlant};
      const auto& p = ctx.field.plants.at(id);
      if (p.state == field::PlantState::removed) return {ErrorCode::kUnknownPlant};
      if (p.plot_id != ctx.user_plot) return {ErrorCode::kCrossPlotTarget};
    }
  } else if (const auto* wd = std::get_if<tasks::Weed>(&task.kind)) {
    if (!inside(plot, wd->target)) return {ErrorCode::kCrossPlotTarget};
  } else if (const auto* m = std::get_if<tasks::MoistureRead>(&task.kind)) {
    if (!inside(plot, m->target)) return {ErrorCode::kCrossPlotTarget};
  }

  if (mode == ControlMode::automated) {
    if (const auto* s = std::get_if<tasks::Sow>(&task.kind); s && s->target) out.rules.insert("A1");
    if (std::holds_alternative<tasks::Water>(task.kind) || std::holds_alternative<tasks::Weed>(task.kind))
      out.rules.insert("A2");
    if (!out.rules.empty()) out.verdict = policy::Verdict::rejected;
    return out;
  }

  if (const auto* s = std::get_if<tasks::Sow>(&task.kind); s && s->target) {
    const double r = ctx.species.at(s->species).spread_radius_mm;
    const double x = s->target->x_mm, y = s->target->y_mm;
    auto clash = [&](plotbot::Coord2 q, double rq) { return std::hypot(x - q.x_mm, y - q.y_mm) < r + rq - 1e-9; };
    for (const auto& [id, p] : ctx.field.plants)
      if (p.state != field::PlantState::removed && clash(p.position, ctx.species.at(p.species_id).spread_radius_mm))
        out.rules.insert("R1");
    for (const auto& [id, res] : ctx.field.reservations)
      if (id != task.id && clash(res.position, ctx.species.at(res.species_id).spread_radius_mm)) out.rules.insert("R1");
    if (x - r < 0 || y - r < 0 || x + r > ctx.field.width_mm || y + r > ctx.field.depth_mm) out.rules.insert("R3");
  }
  if (const auto* w = std::get_if<tasks::Water>(&task.kind)) {
    for (const auto id : w->plants) {
      const auto& p = ctx.field.plants.at(id);
      const bool wet = ctx.field.soil.at(p.position) >= ctx.config.overwater_threshold;
      const bool recent = p.last_watered_at && ctx.now - *p.last_watered_at < ctx.config.repeat_window;
      if (wet || recent) out.rules.insert("R2");
    }
  }
  if (!out.rules.empty())
    out.verdict = mode == ControlMode::manual ? policy::Verdict::warnings : policy::Verdict::rejected;
  return out;
}

inline std::set<std::string> rules_of(const plotbot::policy::ValidationOutcome& o) {
  std::set<std::string> r;
  for (const auto& f : o.findings) r.insert(f.rule_id);
  return r;
}

// A random but reproducible validation problem: a populated field, a task
// from a user on `plot` and a mode.
struct PolicyCase {
  plotbot::field::FieldState field;
  plotbot::tasks::TaskRequest task;
  plotbot::policy::ControlMode mode = plotbot::policy::ControlMode::manual;
  int plot = 0;
  plotbot::Timestamp now{};
};

inline PolicyCase random_policy_case(testgen::Rng& rng, const plotbot::policy::SpeciesCatalog& species) {
  using namespace plotbot;
  PolicyCase c;
  c.field = field::FieldState(gantry::FieldConfig::defaults());
  c.now = Timestamp{} + std::chrono::hours(rng.range(24, 500));
  c.plot = rng.range(0, 17);
  const auto ids = species.ids();
  // Neighborhood: this plot and the ones around it, so R1 can cross borders.
  for (int i = rng.range(0, 12); i > 0; --i) {
    const int plot = rng.coin(0.7) ? c.plot : rng.range(0, 17);
    const auto& pl = c.field.plot(plot);
    field::Plant p;
    p.plot_id = plot;
    p.owner = "o";
    p.species_id = rng.pick(ids);
    p.position = rng.coord2(pl.origin.x_mm, pl.origin.y_mm, pl.size_mm + 1);
    if (rng.coin(0.1)) p.state = field::PlantState::removed;
    if (rng.coin(0.3)) p.last_watered_at = c.now - std::chrono::minutes(rng.range(1, 300));
    const auto id = c.field.add_plant(p);
    if (rng.coin(0.2)) c.field.soil.set(c.field.soil.cell_at(p.position), 0.85 + 0.15 * rng.unit());
    (void)id;
  }
  for (int i = rng.range(0, 2); i > 0; --i) {
    const auto& pl = c.field.plot(c.plot);
    field::Reservation r;
    r.task_id = 100 + i;
    r.owner = "o";
    r.species_id = rng.pick(ids);
    r.position = rng.coord2(pl.origin.x_mm, pl.origin.y_mm, pl.size_mm + 1);
    c.field.reservations[r.task_id] = r;
  }

  const auto& pl = c.field.plot(rng.coin(0.85) ? c.plot : rng.range(0, 17));
  auto point = [&] { return rng.coord2(pl.origin.x_mm, pl.origin.y_mm, pl.size_mm + 1); };
  c.task.id = 1;
  c.task.user_id = "u";
  c.task.submitted_at = c.now;
  switch (rng.range(0, 5)) {
    case 0:
    case 1:
      c.task.kind = tasks::Sow{rng.coin(0.97) ? rng.pick(ids) : std::string("kale"),
                               rng.coin(0.8) ? std::optional<Coord2>(point()) : std::nullopt};
      break;
    case 2: {
      tasks::Water w;
      for (const auto& [id, p] : c.field.plants)
        if (rng.coin(0.5)) w.plants.push_back(id);
      if (rng.coin(0.05)) w.plants.push_back(999);
      if (rng.coin(0.3)) w.water_all_plot = rng.coin(0.9) ? c.plot : rng.range(0, 17);
      c.task.kind = w;
      break;
    }
    case 3:
      c.task.kind = tasks::Weed{point()};
      break;
    case 4:
      c.task.kind = tasks::Scan{rng.coin() ? std::optional<int>(rng.range(0, 17)) : std::nullopt};
      break;
    default:
      c.task.kind = tasks::MoistureRead{point()};
  }
  c.mode = static_cast<policy::ControlMode>(rng.range(0, 2));
  return c;
}

// Runs validate and compares it with mode_semantics. Returns an empty
// string on agreement, otherwise a description of the mismatch.
inline std::string check_policy_case(const PolicyCase& c, const plotbot::policy::SpeciesCatalog& species) {
  using namespace plotbot;
  const policy::ValidationContext ctx{c.field, species, c.plot, c.now, {}};
  const auto want = mode_semantics(c.task, c.mode, ctx);
  std::optional<ErrorCode> got_error;
  policy::ValidationOutcome got;
  try {
    got = policy::validate(c.task, c.mode, ctx);
  } catch (const Error& e) {
    got_error = e.code();
  }
  if (got_error != want.error)
    return "error mismatch: got " + std::string(got_error ? error_name(*got_error) : "none") + ", want " +
           std::string(want.error ? error_name(*want.error) : "none");
  if (got_error) return {};
  if (got.verdict != want.verdict)
    return "verdict mismatch: got " + std::string(policy::to_string(got.verdict)) + ", want " +
           std::string(policy::to_string(want.verdict));
  if (rules_of(got) != want.rules) return "rule set mismatch";
  return {};
}

// Plants an automated user's day should water: live, in the plot, below the
// species threshold, and not rain-suspended.
inline std::vector<plotbot::field::PlantId> planner_water(const plotbot::field::FieldState& field, int plot,
                                                          const plotbot::policy::SpeciesCatalog& species,
                                                          bool raining, double suspend = 0.25) {
  std::vector<plotbot::field::PlantId> out;
  for (const auto& [id, p] : field.plants) {
    if (!p.live() || p.plot_id != plot) continue;
    const double m = field.moisture_at(p.position);
    if (m >= species.at(p.species_id).moisture_threshold) continue;
    if (raining && m >= suspend) continue;
    out.push_back(id);
  }
  return out;
}

// Compares plan_automated_day against planner_water for every user.
inline std::string check_planner_case(const plotbot::field::FieldState& field,
                                      const std::vector<plotbot::sched::PlannerUser>& users,
                                      const plotbot::policy::SpeciesCatalog& species, bool raining) {
  using namespace plotbot;
  const sched::WeatherSample w{Timestamp{}, raining, raining ? 5.0 : 0.0, 15.0};
  const auto plan = sched::plan_automated_day(Timestamp{}, w, field, users, species, {});
  std::map<std::string, std::vector<field::PlantId>> got;
  for (const auto& t : plan)
    if (const auto* water = std::get_if<tasks::Water>(&t.kind)) {
      if (got.contains(t.user_id)) return "two water tasks for " + t.user_id;
      got[t.user_id] = water->plants;
    }
  for (const auto& u : users) {
    auto want = u.mode == policy::ControlMode::automated ? planner_water(field, u.plot_id, species, raining)
                                                          : std::vector<field::PlantId>{};
    auto have = got.contains(u.user_id) ? got[u.user_id] : std::vector<field::PlantId>{};
    std::sort(have.begin(), have.end());
    if (want != have) return "water set mismatch for " + u.user_id;
    if (got.contains(u.user_id) && have.empty()) return "empty water task for " + u.user_id;
  }
  return {};
}

struct PlannerCase {
  plotbot::field::FieldState field;
  std::vector<plotbot::sched::PlannerUser> users;
  bool raining = false;
};

inline PlannerCase random_planner_case(testgen::Rng& rng, const plotbot::policy::SpeciesCatalog& species) {
  using namespace plotbot;
  PlannerCase c{field::FieldState(gantry::FieldConfig::defaults()), {}, rng.coin(0.4)};
  const auto ids = species.ids();
  for (int u = 0; u < 6; ++u)
    c.users.push_back({"u" + std::to_string(u), u * 3, static_cast<policy::ControlMode>(rng.range(0, 2))});
  for (int i = rng.range(0, 30); i > 0; --i) {
    const int plot = rng.range(0, 17);
    const auto& pl = c.field.plot(plot);
    field::Plant p;
    p.plot_id = plot;
    p.owner = plot % 3 == 0 ? "u" + std::to_string(plot / 3) : "o" + std::to_string(plot);
    p.species_id = rng.pick(ids);
    p.position = rng.coord2(pl.origin.x_mm, pl.origin.y_mm, pl.size_mm);
    if (rng.coin(0.1)) p.state = field::PlantState::removed;
    c.field.add_plant(p);
    // Moisture on both sides of the thresholds and the rain cut.
    const double m = rng.coin(0.3) ? rng.pick(std::vector<double>{0.25, 0.3, 0.35, 0.4, 0.2499}) : rng.unit() * 0.6;
    c.field.soil.set(c.field.soil.cell_at(p.position), m);
  }
  return c;
}

}  // namespace oracle

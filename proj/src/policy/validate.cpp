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

#include "plotbot/policy/validate.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "plotbot/error.hpp"
#include "plotbot/overloaded.hpp"

namespace plotbot::policy {

using tasks::Origin;

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::ok: return "ok";
    case Verdict::warnings: return "warnings";
    case Verdict::rejected: return "rejected";
  }
  return "ok";
}

bool ValidationOutcome::has_rule(std::string_view rule) const {
  return std::any_of(findings.begin(), findings.end(), [&](const Finding& f) { return f.rule_id == rule; });
}

bool too_close(Coord2 p, int radius_p, Coord2 q, int radius_q) {
  const std::int64_t reach = static_cast<std::int64_t>(radius_p) + radius_q;
  return squared_distance(p, q) < reach * reach;
}

std::vector<Occupant> occupants(const field::FieldState& field, const SpeciesCatalog& species,
                                std::optional<field::TaskId> exclude_task) {
  std::vector<Occupant> out;
  for (const auto& [id, plant] : field.plants) {
    if (!plant.live()) continue;
    out.push_back({plant.position, species.at(plant.species_id).spread_radius_mm, fmt::format("plant:{}", id)});
  }
  for (const auto& [task, r] : field.reservations) {
    if (exclude_task && *exclude_task == task) continue;
    out.push_back({r.position, species.at(r.species_id).spread_radius_mm, fmt::format("task:{}", task)});
  }
  return out;
}

namespace {

[[noreturn]] void cross_plot(const std::string& what, int user_plot) {
  throw Error(ErrorCode::kCrossPlotTarget, fmt::format("{} lies outside plot {}", what, user_plot),
              {{"plot_id", user_plot}});
}

void require_in_plot(Coord2 p, const ValidationContext& ctx) {
  if (!ctx.field.plot(ctx.user_plot).contains(p))
    cross_plot(fmt::format("target ({}, {})", p.x_mm, p.y_mm), ctx.user_plot);
}

std::vector<Finding> sow_findings(const tasks::Sow& sow, const tasks::TaskRequest& task, const ValidationContext& ctx) {
  std::vector<Finding> out;
  const auto& spec = ctx.species.at(sow.species);
  if (!sow.target) return out;
  const Coord2 p = *sow.target;
  const int r = spec.spread_radius_mm;

  Finding spacing{kRuleSpacing, {}, {}};
  for (const auto& q : occupants(ctx.field, ctx.species, task.id)) {
    if (too_close(p, r, q.position, q.radius_mm)) spacing.offending.push_back(q.label);
  }
  if (!spacing.offending.empty()) {
    spacing.reason = fmt::format("{} at ({}, {}) needs {} mm of clearance; too close to {}", sow.species, p.x_mm,
                                 p.y_mm, r, fmt::join(spacing.offending, ", "));
    out.push_back(std::move(spacing));
  }
  if (p.x_mm - r < 0 || p.y_mm - r < 0 || p.x_mm + r > ctx.field.width_mm || p.y_mm + r > ctx.field.depth_mm) {
    out.push_back({kRuleFieldMargin,
                   fmt::format("growth circle of {} mm at ({}, {}) extends past the field edge", r, p.x_mm, p.y_mm),
                   {fmt::format("plot:{}", ctx.user_plot)}});
  }
  return out;
}

std::vector<Finding> water_findings(const tasks::Water& water, const ValidationContext& ctx) {
  Finding f{kRuleOverwatering, {}, {}};
  std::vector<std::string> wet, recent;
  for (const auto id : water.plants) {
    const auto& plant = ctx.field.plant(id);
    if (ctx.field.moisture_at(plant.position) >= ctx.config.overwater_threshold) {
      wet.push_back(fmt::format("plant:{}", id));
    } else if (plant.last_watered_at && ctx.now - *plant.last_watered_at < ctx.config.repeat_window) {
      recent.push_back(fmt::format("plant:{}", id));
    }
  }
  if (wet.empty() && recent.empty()) return {};
  std::vector<std::string> reasons;
  if (!wet.empty())
    reasons.push_back(fmt::format("soil already at or above {:.2f} moisture for {}", ctx.config.overwater_threshold,
                                  fmt::join(wet, ", ")));
  if (!recent.empty())
    reasons.push_back(fmt::format("watered within the last {} min: {}",
                                  std::chrono::duration_cast<std::chrono::minutes>(ctx.config.repeat_window).count(),
                                  fmt::join(recent, ", ")));
  f.reason = fmt::format("{}", fmt::join(reasons, "; "));
  f.offending = std::move(wet);
  f.offending.insert(f.offending.end(), recent.begin(), recent.end());
  return {std::move(f)};
}

// Hard checks shared by all modes. Throws on violation.
void check_hard_rules(const tasks::TaskRequest& task, const ValidationContext& ctx) {
  std::visit(Overloaded{
                 [&](const tasks::Sow& s) {
                   ctx.species.at(s.species);
                   if (s.target) require_in_plot(*s.target, ctx);
                 },
                 [&](const tasks::Water& w) {
                   if (w.water_all_plot && *w.water_all_plot != ctx.user_plot)
                     cross_plot(fmt::format("plot {}", *w.water_all_plot), ctx.user_plot);
                   if (w.plants.empty()) throw Error(ErrorCode::kEmptyTargetList, "water task has no targets");
                   for (const auto id : w.plants) {
                     const auto& plant = ctx.field.plant(id);
                     if (!plant.live())
                       throw Error(ErrorCode::kUnknownPlant, fmt::format("plant {} was removed", id), {{"plant_id", id}});
                     if (plant.plot_id != ctx.user_plot) cross_plot(fmt::format("plant {}", id), ctx.user_plot);
                   }
                 },
                 [&](const tasks::Weed& w) { require_in_plot(w.target, ctx); },
                 [&](const tasks::Scan& s) {
                   if (s.plot) ctx.field.plot(*s.plot);
                 },
                 [&](const tasks::MoistureRead& m) { require_in_plot(m.target, ctx); },
             },
             task.kind);
}

}  // namespace

ValidationOutcome validate(const tasks::TaskRequest& task, ControlMode mode, const ValidationContext& ctx) {
  // The shared scan belongs to no plot and is read-only.
  const bool robot_scan = task.origin == Origin::auto_planner && std::holds_alternative<tasks::Scan>(task.kind);
  if (!robot_scan) check_hard_rules(task, ctx);
  if (task.origin == Origin::auto_planner) return {};

  std::vector<Finding> findings;
  if (mode == ControlMode::automated) {
    if (const auto* sow = std::get_if<tasks::Sow>(&task.kind); sow && sow->target) {
      findings.push_back({kRuleAutomatedPlacement, "automated mode places seeds itself; omit the target position", {}});
    }
    if (ctx.config.automated_rejects_care &&
        (std::holds_alternative<tasks::Water>(task.kind) || std::holds_alternative<tasks::Weed>(task.kind))) {
      findings.push_back({kRuleAutomatedCare, "automated mode already schedules watering and weeding", {}});
    }
    if (!findings.empty()) return {Verdict::rejected, std::move(findings)};
  }

  if (const auto* sow = std::get_if<tasks::Sow>(&task.kind)) {
    findings = sow_findings(*sow, task, ctx);
  } else if (const auto* water = std::get_if<tasks::Water>(&task.kind)) {
    findings = water_findings(*water, ctx);
  }
  if (findings.empty()) return {};
  return {mode == ControlMode::manual ? Verdict::warnings : Verdict::rejected, std::move(findings)};
}

int grid_capacity_per_axis(int plot_size_mm, int radius_mm) {
  if (radius_mm <= 0 || 2 * radius_mm > plot_size_mm) return 0;
  return (plot_size_mm - 2 * radius_mm) / (2 * radius_mm) + 1;
}

std::vector<Coord2> auto_place(const SpeciesSpec& species, int count, const field::Plot& plot,
                               std::span<const Occupant> existing) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "placement count must be at least 1");
  const int r = species.spread_radius_mm;
  const int n = grid_capacity_per_axis(plot.size_mm, r);
  std::vector<Coord2> out;
  for (int row = 0; row < n && static_cast<int>(out.size()) < count; ++row) {
    for (int col = 0; col < n && static_cast<int>(out.size()) < count; ++col) {
      const Coord2 p{plot.origin.x_mm + r + 2 * r * col, plot.origin.y_mm + r + 2 * r * row};
      const bool blocked =
          std::any_of(existing.begin(), existing.end(), [&](const Occupant& q) { return too_close(p, r, q.position, q.radius_mm); }) ||
          std::any_of(out.begin(), out.end(), [&](Coord2 q) { return too_close(p, r, q, r); });
      if (!blocked) out.push_back(p);
    }
  }
  if (static_cast<int>(out.size()) < count)
    throw Error(ErrorCode::kPlacementExhausted,
                fmt::format("only {} free {} positions in plot {}, {} requested", out.size(), species.species_id,
                            plot.id, count),
                {{"available", out.size()}, {"requested", count}});
  return out;
}

void to_json(nlohmann::json& j, const Finding& f) {
  j = {{"rule_id", f.rule_id}, {"reason", f.reason}, {"offending", f.offending}};
}
void from_json(const nlohmann::json& j, Finding& f) {
  f.rule_id = j.at("rule_id").get<std::string>();
  f.reason = j.at("reason").get<std::string>();
  f.offending = j.at("offending").get<std::vector<std::string>>();
}
void to_json(nlohmann::json& j, const ValidationOutcome& o) {
  j = {{"verdict", to_string(o.verdict)}, {"findings", o.findings}};
}
void from_json(const nlohmann::json& j, ValidationOutcome& o) {
  const auto v = j.at("verdict").get<std::string>();
  o.verdict = v == "rejected" ? Verdict::rejected : v == "warnings" ? Verdict::warnings : Verdict::ok;
  o.findings = j.at("findings").get<std::vector<Finding>>();
}

}  // namespace plotbot::policy

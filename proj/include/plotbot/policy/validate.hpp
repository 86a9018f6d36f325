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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/field/field_state.hpp"
#include "plotbot/policy/modes.hpp"
#include "plotbot/policy/species.hpp"
#include "plotbot/tasks/task.hpp"

namespace plotbot::policy {

// Rule ids surfaced to clients.
inline constexpr const char* kRuleSpacing = "R1";
inline constexpr const char* kRuleOverwatering = "R2";
inline constexpr const char* kRuleFieldMargin = "R3";
inline constexpr const char* kRuleAutomatedPlacement = "A1";
inline constexpr const char* kRuleAutomatedCare = "A2";

enum class Verdict { ok, warnings, rejected };

std::string_view to_string(Verdict v) noexcept;

struct Finding {
  std::string rule_id;
  std::string reason;
  std::vector<std::string> offending;  // "plant:12", "task:40", "plot:3"
  bool operator==(const Finding&) const = default;
};

struct ValidationOutcome {
  Verdict verdict = Verdict::ok;
  std::vector<Finding> findings;

  bool accepted() const { return verdict != Verdict::rejected; }
  bool has_rule(std::string_view rule) const;
  bool operator==(const ValidationOutcome&) const = default;
};

struct PolicyConfig {
  double overwater_threshold = 0.9;
  Duration repeat_window = std::chrono::hours(2);
  bool automated_rejects_care = true;
};

struct ValidationContext {
  const field::FieldState& field;
  const SpeciesCatalog& species;
  int user_plot = 0;
  Timestamp now{};
  PolicyConfig config;
};

// Something already occupying space on the bed: a live plant or a pending
// sow reservation.
struct Occupant {
  Coord2 position;
  int radius_mm = 0;
  std::string label;
};

// Live plants plus reservations, excluding the reservation held by
// `exclude_task` (a task is never in conflict with itself).
std::vector<Occupant> occupants(const field::FieldState& field, const SpeciesCatalog& species,
                                std::optional<field::TaskId> exclude_task = std::nullopt);

// R1: p (radius r_p) is too close to q iff |p - q| < r_p + r_q. Exactly
// touching circles are legal.
bool too_close(Coord2 p, int radius_p, Coord2 q, int radius_q);

// Evaluates the soft rules for `task` and maps them through `mode`:
// Manual -> warnings, Hybrid -> rejection. Automated rejects explicitly
// placed sows (A1) and interactive water/weed (A2). Tasks from the
// auto-planner skip the soft rules.
//
// Hard errors in every mode: CrossPlotTarget (target outside the
// requester's plot), UnknownPlant, UnknownSpecies, EmptyTargetList.
ValidationOutcome validate(const tasks::TaskRequest& task, ControlMode mode, const ValidationContext& ctx);

// Regular grid inside `plot`: margin = r, pitch = 2r, row-major, skipping
// cells that conflict (R1) with `existing`. Positions are absolute field
// coordinates. Throws InvalidArgument for count < 1 and PlacementExhausted
// when fewer than `count` cells fit.
std::vector<Coord2> auto_place(const SpeciesSpec& species, int count, const field::Plot& plot,
                               std::span<const Occupant> existing);

// Grid cells per axis: floor((size - 2r) / 2r) + 1, or 0 if 2r > size.
int grid_capacity_per_axis(int plot_size_mm, int radius_mm);

void to_json(nlohmann::json& j, const Finding& f);
void from_json(const nlohmann::json& j, Finding& f);
void to_json(nlohmann::json& j, const ValidationOutcome& o);
void from_json(const nlohmann::json& j, ValidationOutcome& o);

}  // namespace plotbot::policy

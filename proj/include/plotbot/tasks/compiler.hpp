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

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "plotbot/field/field_state.hpp"
#include "plotbot/gantry/config.hpp"
#include "plotbot/gantry/simulator.hpp"
#include "plotbot/policy/species.hpp"
#include "plotbot/tasks/task.hpp"

namespace plotbot::tasks {

struct CompilerConfig {
  int scan_grid_mm = 300;
  double rotary_spin_s = 5.0;
};

struct CompileContext {
  const gantry::FieldConfig& field_config;
  const policy::SpeciesCatalog& species;
  const field::FieldState& field;
  CompilerConfig config;
};

// Translates a validated task into gantry primitives. Pure: the same
// (task, context, gantry state) always yields the same steps.
//
//   Sow   -> Mount(seeder), container approach + vacuum_pick, target
//            approach, lower to seed depth, vacuum_release, raise, Unmount
//   Water -> Mount(nozzle), nearest-neighbor MoveTo + dispense per plant, Unmount
//   Weed  -> Mount(weeder), MoveTo, lower, rotary_spin, raise, Unmount
//   Scan  -> serpentine MoveTo + capture_image sweep, no tool
//   MoistureRead -> Mount(probe), MoveTo, lower, read_moisture, raise, Unmount
//
// If the gantry still carries a tool the sequence starts with an Unmount.
// Throws UnknownSpecies, EmptyTargetList, UnknownPlant, InvalidArgument
// (unplaced Sow).
std::vector<PrimitiveStep> compile(const TaskRequest& task, const CompileContext& ctx,
                                   const gantry::GantryState& gantry);

// Greedy nearest-neighbor tour from `start`; ties go to the lower plant id.
std::vector<PlantId> nearest_neighbor_order(Coord2 start, std::vector<std::pair<PlantId, Coord2>> targets);

// Cell-center waypoints of a serpentine sweep over [origin, origin + extent].
std::vector<Coord2> boustrophedon(Coord2 origin, int width_mm, int depth_mm, int grid_mm);

// Throws MalformedSequence on: Actuate without its tool, double Mount,
// Unmount with nothing mounted, or ending with a tool still mounted.
void check_well_formed(std::span<const PrimitiveStep> steps, gantry::Tool initial_tool = gantry::Tool::none);

// Motion (plan_move) plus fixed actuation times, starting at `start`.
// Throws MalformedSequence for ill-formed or out-of-bounds sequences.
double estimate_duration(std::span<const PrimitiveStep> steps, const gantry::FieldConfig& config,
                         Coord3 start, gantry::Tool initial_tool = gantry::Tool::none);
double estimate_duration(std::span<const PrimitiveStep> steps, const gantry::FieldConfig& config);

struct StepRecord {
  std::size_t index = 0;
  PrimitiveStep step;
  gantry::GantryState after;
  std::optional<gantry::ActuationResult> result;
};

using StepObserver = std::function<void(const StepRecord&)>;

// Executes `steps` in order on the simulator. The first failing step throws
// the simulator's error with "step_index" added to its details.
std::vector<StepRecord> replay(std::span<const PrimitiveStep> steps, gantry::Simulator& sim,
                               gantry::SoilGrid& soil, const StepObserver& observer = {});

}  // namespace plotbot::tasks

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
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/gantry/config.hpp"
#include "plotbot/gantry/soil.hpp"
#include "plotbot/time.hpp"

namespace plotbot::gantry {

struct MotionPlan {
  double duration_s = 0.0;
  Coord3 from;
  Coord3 to;

  // Axes move simultaneously at constant speed; each axis finishes at
  // |delta| / speed and then holds.
  Coord3 position_at(double t_s, const AxisSpeeds& speeds) const;
};

// Constant per-axis velocity, simultaneous axes: the duration is the slowest
// axis. Throws Error(kOutOfBounds) if either endpoint leaves the axis bounds.
MotionPlan plan_move(const Coord3& from, const Coord3& to, const AxisSpeeds& speeds,
                     const FieldConfig& bounds);

struct DispenseWater {
  double volume_ml = 0.0;
  auto operator<=>(const DispenseWater&) const = default;
};
struct VacuumPick {
  std::string species;
  auto operator<=>(const VacuumPick&) const = default;
};
struct VacuumRelease {
  auto operator<=>(const VacuumRelease&) const = default;
};
struct RotarySpin {
  double duration_s = 0.0;
  auto operator<=>(const RotarySpin&) const = default;
};
struct CaptureImage {
  auto operator<=>(const CaptureImage&) const = default;
};
struct ReadMoisture {
  auto operator<=>(const ReadMoisture&) const = default;
};

using Action = std::variant<DispenseWater, VacuumPick, VacuumRelease, RotarySpin, CaptureImage, ReadMoisture>;

// The tool an action needs; Tool::none when the action uses fixed hardware
// (the borescope sits on the z-axis next to the tool mount).
Tool required_tool(const Action& action) noexcept;
std::string action_name(const Action& action);

// 3x3 neighborhood of soil cells under the borescope.
struct CellImage {
  CellIndex center;
  std::vector<double> moisture;  // row-major, out-of-field cells are NaN
};

struct ActuationResult {
  double duration_s = 0.0;
  Coord3 at;
  std::optional<double> moisture;             // read_moisture
  std::optional<CellImage> image;             // capture_image
  std::optional<std::string> released_seed;   // vacuum_release
  std::vector<CellIndex> watered_cells;       // dispense_water
};

struct GantryState {
  Coord3 position;
  Tool mounted_tool = Tool::none;
  bool busy = false;
  Timestamp sim_clock{};
  std::optional<std::string> held_seed;

  bool operator==(const GantryState&) const = default;
};

// Deterministic twin of the track-based gantry. The simulator owns the
// robot; the soil it acts on is passed in by the caller.
class Simulator {
 public:
  explicit Simulator(FieldConfig config);

  const FieldConfig& config() const { return config_; }
  const GantryState& state() const { return state_; }
  const std::set<Tool>& tool_bay() const { return bay_; }
  bool in_bay(Tool tool) const { return bay_.contains(tool); }

  void set_clock(Timestamp t) { state_.sim_clock = t; }

  MotionPlan move_to(const Coord3& target);

  // Moves above the slot, lowers, engages the magnets, raises.
  const GantryState& mount_tool(Tool tool);
  // Reverse of mount_tool: the tool goes back into its own slot.
  const GantryState& unmount_tool();

  ActuationResult actuate(const Action& action, SoilGrid& soil);

  // Idles for `seconds` of simulated time.
  void wait(double seconds);

  // Post-fault recovery: any mounted tool is returned to the bay, any held
  // seed is dropped and the head is parked at home. Clock is unchanged.
  void recover();

  void restore(GantryState state, std::set<Tool> bay);

 private:
  class BusyScope;

  void advance(double seconds);
  Coord3 slot_of(Tool tool) const;

  FieldConfig config_;
  GantryState state_;
  std::set<Tool> bay_;
};

void to_json(nlohmann::json& j, const GantryState& s);
void from_json(const nlohmann::json& j, GantryState& s);
void to_json(nlohmann::json& j, const Action& a);
void from_json(const nlohmann::json& j, Action& a);

}  // namespace plotbot::gantry

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

#include "plotbot/gantry/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "plotbot/error.hpp"
#include "plotbot/overloaded.hpp"

namespace plotbot::gantry {

namespace {

std::string describe(const Coord3& c) { return fmt::format("({}, {}, {})", c.x_mm, c.y_mm, c.z_mm); }

double axis_time(int delta, double speed) { return std::abs(static_cast<double>(delta)) / speed; }

int axis_position(int from, int to, double t_s, double speed) {
  const double total = axis_time(to - from, speed);
  if (t_s >= total) return to;
  const double dir = to > from ? 1.0 : -1.0;
  return from + static_cast<int>(std::lround(dir * speed * t_s));
}

}  // namespace

Coord3 MotionPlan::position_at(double t_s, const AxisSpeeds& speeds) const {
  return {axis_position(from.x_mm, to.x_mm, t_s, speeds.x_mm_per_s),
          axis_position(from.y_mm, to.y_mm, t_s, speeds.y_mm_per_s),
          axis_position(from.z_mm, to.z_mm, t_s, speeds.z_mm_per_s)};
}

MotionPlan plan_move(const Coord3& from, const Coord3& to, const AxisSpeeds& speeds, const FieldConfig& bounds) {
  if (!bounds.in_bounds(from))
    throw Error(ErrorCode::kOutOfBounds, "move origin out of bounds " + describe(from), {{"coord", from}});
  if (!bounds.in_bounds(to))
    throw Error(ErrorCode::kOutOfBounds, "move target out of bounds " + describe(to), {{"coord", to}});
  const double t = std::max({axis_time(to.x_mm - from.x_mm, speeds.x_mm_per_s),
                             axis_time(to.y_mm - from.y_mm, speeds.y_mm_per_s),
                             axis_time(to.z_mm - from.z_mm, speeds.z_mm_per_s)});
  return {t, from, to};
}

Tool required_tool(const Action& action) noexcept {
  return std::visit(Overloaded{
                        [](const DispenseWater&) { return Tool::watering_nozzle; },
                        [](const VacuumPick&) { return Tool::seeder; },
                        [](const VacuumRelease&) { return Tool::seeder; },
                        [](const RotarySpin&) { return Tool::weeder; },
                        [](const CaptureImage&) { return Tool::none; },
                        [](const ReadMoisture&) { return Tool::moisture_probe; },
                    },
                    action);
}

std::string action_name(const Action& action) {
  return std::visit(Overloaded{
                        [](const DispenseWater&) { return std::string("dispense_water"); },
                        [](const VacuumPick&) { return std::string("vacuum_pick"); },
                        [](const VacuumRelease&) { return std::string("vacuum_release"); },
                        [](const RotarySpin&) { return std::string("rotary_spin"); },
                        [](const CaptureImage&) { return std::string("capture_image"); },
                        [](const ReadMoisture&) { return std::string("read_moisture"); },
                    },
                    action);
}

// Holds GantryState::busy for the lifetime of one primitive.
class Simulator::BusyScope {
 public:
  explicit BusyScope(GantryState& s) : state_(s) { state_.busy = true; }
  ~BusyScope() { state_.busy = false; }
  BusyScope(const BusyScope&) = delete;
  BusyScope& operator=(const BusyScope&) = delete;

 private:
  GantryState& state_;
};

Simulator::Simulator(FieldConfig config) : config_(std::move(config)) {
  config_.validate();
  state_.position = config_.home_position;
  for (const auto& [tool, slot] : config_.tool_bay_slots) bay_.insert(tool);
}

void Simulator::advance(double seconds) { state_.sim_clock += seconds_to_duration(seconds); }

Coord3 Simulator::slot_of(Tool tool) const {
  const auto it = config_.tool_bay_slots.find(tool);
  if (it == config_.tool_bay_slots.end())
    throw Error(ErrorCode::kUnknownTool, fmt::format("tool '{}' has no bay slot", to_string(tool)));
  return it->second;
}

MotionPlan Simulator::move_to(const Coord3& target) {
  if (state_.busy) throw Error(ErrorCode::kRobotBusy, "gantry is executing another step");
  const MotionPlan plan = plan_move(state_.position, target, config_.axis_speed, config_);
  BusyScope busy(state_);
  state_.position = target;
  advance(plan.duration_s);
  return plan;
}

const GantryState& Simulator::mount_tool(Tool tool) {
  if (state_.busy) throw Error(ErrorCode::kRobotBusy, "gantry is executing another step");
  const Coord3 slot = slot_of(tool);
  if (!bay_.contains(tool))
    throw Error(ErrorCode::kToolNotInBay, fmt::format("tool '{}' is not in the bay", to_string(tool)));
  if (state_.mounted_tool != Tool::none)
    throw Error(ErrorCode::kToolAlreadyMounted,
                fmt::format("cannot mount '{}': '{}' already mounted", to_string(tool),
                            to_string(state_.mounted_tool)));
  const Coord3 above{slot.x_mm, slot.y_mm, 0};
  move_to(above);
  move_to(slot);
  {
    BusyScope busy(state_);
    advance(config_.timings.engage_s);
    bay_.erase(tool);
    state_.mounted_tool = tool;
  }
  move_to(above);
  return state_;
}

const GantryState& Simulator::unmount_tool() {
  if (state_.busy) throw Error(ErrorCode::kRobotBusy, "gantry is executing another step");
  if (state_.mounted_tool == Tool::none) throw Error(ErrorCode::kNoToolMounted, "no tool mounted");
  const Tool tool = state_.mounted_tool;
  const Coord3 slot = slot_of(tool);
  const Coord3 above{slot.x_mm, slot.y_mm, 0};
  move_to(above);
  move_to(slot);
  {
    BusyScope busy(state_);
    advance(config_.timings.engage_s);
    bay_.insert(tool);
    state_.mounted_tool = Tool::none;
    state_.held_seed.reset();
  }
  move_to(above);
  return state_;
}

ActuationResult Simulator::actuate(const Action& action, SoilGrid& soil) {
  if (state_.busy) throw Error(ErrorCode::kRobotBusy, "gantry is executing another step");
  const Tool needed = required_tool(action);
  if (needed != Tool::none && state_.mounted_tool != needed)
    throw Error(ErrorCode::kWrongToolMounted,
                fmt::format("{} needs '{}' but '{}' is mounted", action_name(action), to_string(needed),
                            to_string(state_.mounted_tool)));

  ActuationResult result;
  result.at = state_.position;
  const Coord2 here = state_.position.xy();
  const auto& timings = config_.timings;

  // Preconditions are checked before anything mutates.
  std::visit(Overloaded{
                 [&](const DispenseWater& a) {
                   if (!(a.volume_ml >= 0.0))
                     throw Error(ErrorCode::kInvalidArgument, "dispense volume must be nonnegative");
                 },
                 [&](const VacuumPick& a) {
                   const auto it = config_.seed_containers.find(a.species);
                   if (it == config_.seed_containers.end())
                     throw Error(ErrorCode::kUnknownSpecies, "no seed container for '" + a.species + "'");
                   if (state_.position != it->second)
                     throw Error(ErrorCode::kNotAtSeedContainer,
                                 fmt::format("head at {} but {} container is at {}", describe(state_.position),
                                             a.species, describe(it->second)));
                   if (state_.held_seed) throw Error(ErrorCode::kSeedAlreadyHeld, "seeder already holds a seed");
                 },
                 [&](const VacuumRelease&) {
                   if (!state_.held_seed) throw Error(ErrorCode::kNoSeedHeld, "seeder holds no seed");
                 },
                 [&](const RotarySpin& a) {
                   if (!(a.duration_s >= 0.0))
                     throw Error(ErrorCode::kInvalidArgument, "spin duration must be nonnegative");
                 },
                 [](const CaptureImage&) {},
                 [](const ReadMoisture&) {},
             },
             action);

  BusyScope busy(state_);
  std::visit(Overloaded{
                 [&](const DispenseWater& a) {
                   result.watered_cells = soil.add_within(here, config_.moisture.spray_radius_mm,
                                                          a.volume_ml * config_.moisture.absorption_per_ml);
                   result.duration_s = a.volume_ml * timings.dispense_s_per_ml;
                 },
                 [&](const VacuumPick& a) {
                   state_.held_seed = a.species;
                   result.duration_s = timings.vacuum_pick_s;
                 },
                 [&](const VacuumRelease&) {
                   result.released_seed = std::move(state_.held_seed);
                   state_.held_seed.reset();
                   result.duration_s = timings.vacuum_release_s;
                 },
                 [&](const RotarySpin& a) { result.duration_s = a.duration_s; },
                 [&](const CaptureImage&) {
                   const CellIndex center = soil.cell_at(here);
                   CellImage img{center, {}};
                   for (int dr = -1; dr <= 1; ++dr) {
                     for (int dc = -1; dc <= 1; ++dc) {
                       const CellIndex c{center.col + dc, center.row + dr};
                       const bool inside = c.col >= 0 && c.col < soil.cols() && c.row >= 0 && c.row < soil.rows();
                       img.moisture.push_back(inside ? soil.at(c) : std::numeric_limits<double>::quiet_NaN());
                     }
                   }
                   result.image = std::move(img);
                   result.duration_s = timings.capture_image_s;
                 },
                 [&](const ReadMoisture&) {
                   result.moisture = soil.at(here);
                   result.duration_s = timings.read_moisture_s;
                 },
             },
             action);
  advance(result.duration_s);
  return result;
}

void Simulator::wait(double seconds) {
  if (!(seconds >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "wait must be nonnegative");
  BusyScope busy(state_);
  advance(seconds);
}

void Simulator::recover() {
  if (state_.mounted_tool != Tool::none) bay_.insert(state_.mounted_tool);
  state_.mounted_tool = Tool::none;
  state_.held_seed.reset();
  state_.busy = false;
  state_.position = config_.home_position;
}

void Simulator::restore(GantryState state, std::set<Tool> bay) {
  state_ = std::move(state);
  bay_ = std::move(bay);
}

void to_json(nlohmann::json& j, const GantryState& s) {
  j = {{"position", s.position},
       {"mounted_tool", to_string(s.mounted_tool)},
       {"busy", s.busy},
       {"sim_clock", to_micros(s.sim_clock)}};
  j["held_seed"] = s.held_seed ? nlohmann::json(*s.held_seed) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, GantryState& s) {
  s.position = j.at("position").get<Coord3>();
  s.mounted_tool = tool_from_string(j.at("mounted_tool").get<std::string>()).value_or(Tool::none);
  s.busy = j.at("busy").get<bool>();
  s.sim_clock = from_micros(j.at("sim_clock").get<std::int64_t>());
  if (j.contains("held_seed") && !j.at("held_seed").is_null())
    s.held_seed = j.at("held_seed").get<std::string>();
  else
    s.held_seed.reset();
}

void to_json(nlohmann::json& j, const Action& a) {
  j = {{"action", action_name(a)}};
  std::visit(Overloaded{
                 [&](const DispenseWater& d) { j["volume_ml"] = d.volume_ml; },
                 [&](const VacuumPick& p) { j["species"] = p.species; },
                 [](const VacuumRelease&) {},
                 [&](const RotarySpin& r) { j["duration_s"] = r.duration_s; },
                 [](const CaptureImage&) {},
                 [](const ReadMoisture&) {},
             },
             a);
}

void from_json(const nlohmann::json& j, Action& a) {
  const auto name = j.at("action").get<std::string>();
  if (name == "dispense_water") a = DispenseWater{j.at("volume_ml").get<double>()};
  else if (name == "vacuum_pick") a = VacuumPick{j.at("species").get<std::string>()};
  else if (name == "vacuum_release") a = VacuumRelease{};
  else if (name == "rotary_spin") a = RotarySpin{j.at("duration_s").get<double>()};
  else if (name == "capture_image") a = CaptureImage{};
  else if (name == "read_moisture") a = ReadMoisture{};
  else throw Error(ErrorCode::kInvalidArgument, "unknown action '" + name + "'");
}

}  // namespace plotbot::gantry

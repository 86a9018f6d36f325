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

#include "plotbot/gantry/config.hpp"

#include <fmt/format.h>

#include "plotbot/error.hpp"

namespace plotbot::gantry {

FieldConfig FieldConfig::defaults() {
  FieldConfig c;
  c.tool_bay_slots = {
      {Tool::watering_nozzle, {100, 0, 300}}, {Tool::seeder, {200, 0, 300}},
      {Tool::weeder, {300, 0, 300}},          {Tool::moisture_probe, {400, 0, 300}},
      {Tool::extra_slot, {500, 0, 300}},
  };
  c.seed_containers = {
      {"lettuce", {1000, 0, 350}},  {"radish", {1100, 0, 350}}, {"cornflower", {1200, 0, 350}},
      {"marigold", {1300, 0, 350}}, {"cumin", {1400, 0, 350}},
  };
  return c;
}

bool FieldConfig::in_bounds(const Coord3& c) const {
  return c.x_mm >= 0 && c.x_mm <= width_mm && c.y_mm >= 0 && c.y_mm <= depth_mm && c.z_mm >= 0 &&
         c.z_mm <= z_max_mm;
}

bool FieldConfig::in_field(Coord2 c) const {
  return c.x_mm >= 0 && c.x_mm <= width_mm && c.y_mm >= 0 && c.y_mm <= depth_mm;
}

void FieldConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kInvalidConfig, why); };
  if (width_mm <= 0 || depth_mm <= 0 || z_max_mm <= 0) fail("field dimensions must be positive");
  if (plot_rows <= 0 || plot_cols <= 0 || plot_size_mm <= 0) fail("plot grid must be positive");
  if (plot_cols * plot_size_mm > width_mm || plot_rows * plot_size_mm > depth_mm)
    fail(fmt::format("{}x{} plots of {} mm do not fit a {}x{} mm bed", plot_rows, plot_cols, plot_size_mm,
                     width_mm, depth_mm));
  if (axis_speed.x_mm_per_s <= 0 || axis_speed.y_mm_per_s <= 0 || axis_speed.z_mm_per_s <= 0)
    fail("axis speeds must be positive");
  if (soil_z_mm < 0 || soil_z_mm > z_max_mm) fail("soil_z_mm outside z travel");
  if (watering_z_mm < 0 || watering_z_mm > z_max_mm) fail("watering_z_mm outside z travel");
  if (!in_bounds(home_position)) fail("home position outside axis bounds");
  for (const auto& [tool, slot] : tool_bay_slots) {
    if (tool == Tool::none) fail("tool bay cannot hold 'none'");
    if (!in_bounds(slot)) fail(fmt::format("tool bay slot for {} outside axis bounds", to_string(tool)));
  }
  for (const auto& [species, at] : seed_containers) {
    if (!in_bounds(at)) fail(fmt::format("seed container for {} outside axis bounds", species));
  }
  if (moisture.cell_mm <= 0) fail("moisture.cell_mm must be positive");
  if (moisture.absorption_per_ml < 0 || moisture.spray_radius_mm < 0) fail("moisture gains must be nonnegative");
  if (moisture.daily_decay < 0 || moisture.daily_decay > 1 || moisture.rain_day_decay < 0 ||
      moisture.rain_day_decay > 1)
    fail("decay factors must lie in [0,1]");
  if (moisture.rain_gain < 0) fail("rain_gain must be nonnegative");
}

void to_json(nlohmann::json& j, const AxisSpeeds& s) {
  j = nlohmann::json::array({s.x_mm_per_s, s.y_mm_per_s, s.z_mm_per_s});
}
void from_json(const nlohmann::json& j, AxisSpeeds& s) {
  s.x_mm_per_s = j.at(0).get<double>();
  s.y_mm_per_s = j.at(1).get<double>();
  s.z_mm_per_s = j.at(2).get<double>();
}

void to_json(nlohmann::json& j, const MoistureConfig& m) {
  j = {{"initial", m.initial},
       {"absorption_per_ml", m.absorption_per_ml},
       {"spray_radius_mm", m.spray_radius_mm},
       {"daily_decay", m.daily_decay},
       {"rain_day_decay", m.rain_day_decay},
       {"rain_gain", m.rain_gain},
       {"cell_mm", m.cell_mm},
       {"adc_full_scale", m.adc_full_scale}};
}
void from_json(const nlohmann::json& j, MoistureConfig& m) {
  MoistureConfig d;
  m.initial = j.value("initial", d.initial);
  m.absorption_per_ml = j.value("absorption_per_ml", d.absorption_per_ml);
  m.spray_radius_mm = j.value("spray_radius_mm", d.spray_radius_mm);
  m.daily_decay = j.value("daily_decay", d.daily_decay);
  m.rain_day_decay = j.value("rain_day_decay", d.rain_day_decay);
  m.rain_gain = j.value("rain_gain", d.rain_gain);
  m.cell_mm = j.value("cell_mm", d.cell_mm);
  m.adc_full_scale = j.value("adc_full_scale", d.adc_full_scale);
}

void to_json(nlohmann::json& j, const ActuationTimings& t) {
  j = {{"engage_s", t.engage_s},
       {"vacuum_pick_s", t.vacuum_pick_s},
       {"vacuum_release_s", t.vacuum_release_s},
       {"dispense_s_per_ml", t.dispense_s_per_ml},
       {"capture_image_s", t.capture_image_s},
       {"read_moisture_s", t.read_moisture_s},
       {"default_rotary_s", t.default_rotary_s}};
}
void from_json(const nlohmann::json& j, ActuationTimings& t) {
  ActuationTimings d;
  t.engage_s = j.value("engage_s", d.engage_s);
  t.vacuum_pick_s = j.value("vacuum_pick_s", d.vacuum_pick_s);
  t.vacuum_release_s = j.value("vacuum_release_s", d.vacuum_release_s);
  t.dispense_s_per_ml = j.value("dispense_s_per_ml", d.dispense_s_per_ml);
  t.capture_image_s = j.value("capture_image_s", d.capture_image_s);
  t.read_moisture_s = j.value("read_moisture_s", d.read_moisture_s);
  t.default_rotary_s = j.value("default_rotary_s", d.default_rotary_s);
}

void to_json(nlohmann::json& j, const FieldConfig& c) {
  nlohmann::json bay = nlohmann::json::object();
  for (const auto& [tool, slot] : c.tool_bay_slots) bay[std::string(to_string(tool))] = slot;
  nlohmann::json seeds = nlohmann::json::object();
  for (const auto& [species, at] : c.seed_containers) seeds[species] = at;
  j = {{"width_mm", c.width_mm},
       {"depth_mm", c.depth_mm},
       {"z_max_mm", c.z_max_mm},
       {"plot_rows", c.plot_rows},
       {"plot_cols", c.plot_cols},
       {"plot_size_mm", c.plot_size_mm},
       {"soil_z_mm", c.soil_z_mm},
       {"watering_z_mm", c.watering_z_mm},
       {"home_position", c.home_position},
       {"axis_speed_mm_per_s", c.axis_speed},
       {"tool_bay_slots", bay},
       {"seed_containers", seeds},
       {"moisture", c.moisture},
       {"timings", c.timings}};
}

void from_json(const nlohmann::json& j, FieldConfig& c) {
  c = FieldConfig::defaults();
  c.width_mm = j.value("width_mm", c.width_mm);
  c.depth_mm = j.value("depth_mm", c.depth_mm);
  c.z_max_mm = j.value("z_max_mm", c.z_max_mm);
  c.plot_rows = j.value("plot_rows", c.plot_rows);
  c.plot_cols = j.value("plot_cols", c.plot_cols);
  c.plot_size_mm = j.value("plot_size_mm", c.plot_size_mm);
  c.soil_z_mm = j.value("soil_z_mm", c.soil_z_mm);
  c.watering_z_mm = j.value("watering_z_mm", c.watering_z_mm);
  if (j.contains("home_position")) c.home_position = j.at("home_position").get<Coord3>();
  if (j.contains("axis_speed_mm_per_s")) c.axis_speed = j.at("axis_speed_mm_per_s").get<AxisSpeeds>();
  if (j.contains("tool_bay_slots")) {
    c.tool_bay_slots.clear();
    for (const auto& [name, slot] : j.at("tool_bay_slots").items()) {
      const auto tool = tool_from_string(name);
      if (!tool || *tool == Tool::none) throw Error(ErrorCode::kInvalidConfig, "unknown tool '" + name + "'");
      c.tool_bay_slots[*tool] = slot.get<Coord3>();
    }
  }
  if (j.contains("seed_containers")) {
    c.seed_containers.clear();
    for (const auto& [species, at] : j.at("seed_containers").items()) c.seed_containers[species] = at.get<Coord3>();
  }
  if (j.contains("moisture")) c.moisture = j.at("moisture").get<MoistureConfig>();
  if (j.contains("timings")) c.timings = j.at("timings").get<ActuationTimings>();
}

}  // namespace plotbot::gantry

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

#include <array>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "plotbot/gantry/geometry.hpp"

namespace plotbot::gantry {

struct AxisSpeeds {
  double x_mm_per_s = 80.0;
  double y_mm_per_s = 80.0;
  double z_mm_per_s = 50.0;
};

// Soil moisture model. Moisture is normalized to [0,1]; `adc_full_scale`
// converts to the raw sensor count a real probe would report.
struct MoistureConfig {
  double initial = 0.4;
  double absorption_per_ml = 0.002;
  int spray_radius_mm = 150;
  double daily_decay = 0.7;
  double rain_day_decay = 0.95;
  double rain_gain = 0.3;
  int cell_mm = 100;
  int adc_full_scale = 1023;
};

// Fixed actuation durations, seconds.
struct ActuationTimings {
  double engage_s = 1.0;
  double vacuum_pick_s = 2.0;
  double vacuum_release_s = 1.0;
  double dispense_s_per_ml = 0.05;
  double capture_image_s = 1.0;
  double read_moisture_s = 2.0;
  double default_rotary_s = 5.0;
};

struct FieldConfig {
  int width_mm = 6000;
  int depth_mm = 3000;
  int z_max_mm = 500;
  int plot_rows = 3;
  int plot_cols = 6;
  int plot_size_mm = 1000;
  int soil_z_mm = 400;      // z of the soil surface
  int watering_z_mm = 250;  // nozzle height while dispensing (no effect on the moisture model)
  Coord3 home_position{0, 0, 0};
  AxisSpeeds axis_speed;
  std::map<Tool, Coord3> tool_bay_slots;
  std::map<std::string, Coord3> seed_containers;
  MoistureConfig moisture;
  ActuationTimings timings;

  // 6000 x 3000 mm bed, 3 x 6 one-meter plots, five tools on the y = 0 rail.
  static FieldConfig defaults();

  int plot_count() const { return plot_rows * plot_cols; }
  bool in_bounds(const Coord3& c) const;
  bool in_field(Coord2 c) const;

  // Throws Error(kInvalidConfig) if plots overflow the bed or any fixed
  // location lies outside the axis bounds.
  void validate() const;
};

void to_json(nlohmann::json& j, const AxisSpeeds& s);
void from_json(const nlohmann::json& j, AxisSpeeds& s);
void to_json(nlohmann::json& j, const MoistureConfig& m);
void from_json(const nlohmann::json& j, MoistureConfig& m);
void to_json(nlohmann::json& j, const ActuationTimings& t);
void from_json(const nlohmann::json& j, ActuationTimings& t);
void to_json(nlohmann::json& j, const FieldConfig& c);
void from_json(const nlohmann::json& j, FieldConfig& c);

}  // namespace plotbot::gantry

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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace plotbot {

// Field-plane position in millimeters, origin at the bed corner.
struct Coord2 {
  int x_mm = 0;
  int y_mm = 0;
  auto operator<=>(const Coord2&) const = default;
};

// Gantry head position. z = 0 is fully raised; z grows downward toward soil.
struct Coord3 {
  int x_mm = 0;
  int y_mm = 0;
  int z_mm = 0;
  auto operator<=>(const Coord3&) const = default;

  Coord2 xy() const { return {x_mm, y_mm}; }
};

inline std::int64_t squared_distance(Coord2 a, Coord2 b) {
  const std::int64_t dx = a.x_mm - b.x_mm;
  const std::int64_t dy = a.y_mm - b.y_mm;
  return dx * dx + dy * dy;
}

double distance(Coord2 a, Coord2 b);

namespace gantry {

enum class Tool { none, watering_nozzle, seeder, weeder, moisture_probe, extra_slot };

inline constexpr Tool kAllTools[] = {Tool::watering_nozzle, Tool::seeder, Tool::weeder,
                                     Tool::moisture_probe, Tool::extra_slot};

std::string_view to_string(Tool tool) noexcept;
std::optional<Tool> tool_from_string(std::string_view name) noexcept;

}  // namespace gantry

void to_json(nlohmann::json& j, const Coord2& c);
void from_json(const nlohmann::json& j, Coord2& c);
void to_json(nlohmann::json& j, const Coord3& c);
void from_json(const nlohmann::json& j, Coord3& c);

}  // namespace plotbot

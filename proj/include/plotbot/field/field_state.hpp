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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/gantry/config.hpp"
#include "plotbot/gantry/geometry.hpp"
#include "plotbot/gantry/soil.hpp"
#include "plotbot/time.hpp"

namespace plotbot::field {

using PlantId = std::int64_t;
using TaskId = std::int64_t;

enum class PlantState { sown, germinated, growing, removed };

std::string_view to_string(PlantState s) noexcept;
PlantState plant_state_from_string(std::string_view s);

struct Plot {
  int id = 0;
  Coord2 origin;
  int size_mm = 1000;

  Coord2 far_corner() const { return {origin.x_mm + size_mm, origin.y_mm + size_mm}; }
  // Closed on all sides; shared borders belong to both neighbors here, use
  // FieldState::plot_at for a unique owner.
  bool contains(Coord2 p) const {
    return p.x_mm >= origin.x_mm && p.x_mm <= origin.x_mm + size_mm && p.y_mm >= origin.y_mm &&
           p.y_mm <= origin.y_mm + size_mm;
  }
  bool operator==(const Plot&) const = default;
};

struct Plant {
  PlantId id = 0;
  int plot_id = 0;
  std::string owner;
  std::string species_id;
  Coord2 position;
  Timestamp sown_at{};
  int sown_day = 0;
  PlantState state = PlantState::sown;
  double radius_mm = 0.0;
  std::optional<Timestamp> last_watered_at;
  // Moisture under the plant sampled once per growth tick since sowing.
  std::vector<double> daily_moisture;

  bool live() const { return state != PlantState::removed; }
  bool operator==(const Plant&) const = default;
};

struct WeedMark {
  std::int64_t id = 0;
  Coord2 position;
  int plot_id = 0;
  bool operator==(const WeedMark&) const = default;
};

// A queued Sow that has a target but has not executed yet. Spacing checks
// treat it like a seedling so two pending sows cannot claim the same spot.
struct Reservation {
  TaskId task_id = 0;
  std::string owner;
  std::string species_id;
  Coord2 position;
  bool operator==(const Reservation&) const = default;
};

// Authoritative garden state: plot grid, plants, weeds, pending sow
// reservations and the soil moisture grid.
struct FieldState {
  FieldState() = default;
  explicit FieldState(const gantry::FieldConfig& config);

  int width_mm = 0;
  int depth_mm = 0;
  std::vector<Plot> plots;
  std::map<PlantId, Plant> plants;
  std::map<std::int64_t, WeedMark> weeds;
  std::map<TaskId, Reservation> reservations;
  gantry::SoilGrid soil;
  PlantId next_plant_id = 1;
  std::int64_t next_weed_id = 1;

  // Throws Error(kUnknownPlot).
  const Plot& plot(int id) const;
  // Unique owning plot: borders are half-open except at the far field edge.
  std::optional<int> plot_at(Coord2 p) const;
  bool in_field(Coord2 p) const {
    return p.x_mm >= 0 && p.x_mm <= width_mm && p.y_mm >= 0 && p.y_mm <= depth_mm;
  }
  // Throws Error(kUnknownPlant).
  const Plant& plant(PlantId id) const;
  std::vector<const Plant*> live_plants_in_plot(int plot_id) const;
  std::vector<const Plant*> live_plants_of(std::string_view owner) const;
  double moisture_at(Coord2 p) const { return soil.at(p); }

  PlantId add_plant(Plant p);

  bool operator==(const FieldState&) const = default;
};

void to_json(nlohmann::json& j, const Plant& p);
void from_json(const nlohmann::json& j, Plant& p);
void to_json(nlohmann::json& j, const FieldState& f);
void from_json(const nlohmann::json& j, FieldState& f);

}  // namespace plotbot::field

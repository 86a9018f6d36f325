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

#include "plotbot/field/field_state.hpp"

#include "plotbot/error.hpp"

namespace plotbot::field {

std::string_view to_string(PlantState s) noexcept {
  switch (s) {
    case PlantState::sown: return "sown";
    case PlantState::germinated: return "germinated";
    case PlantState::growing: return "growing";
    case PlantState::removed: return "removed";
  }
  return "sown";
}

PlantState plant_state_from_string(std::string_view s) {
  if (s == "sown") return PlantState::sown;
  if (s == "germinated") return PlantState::germinated;
  if (s == "growing") return PlantState::growing;
  if (s == "removed") return PlantState::removed;
  throw Error(ErrorCode::kInvalidArgument, "unknown plant state '" + std::string(s) + "'");
}

FieldState::FieldState(const gantry::FieldConfig& config)
    : width_mm(config.width_mm),
      depth_mm(config.depth_mm),
      soil(config.width_mm, config.depth_mm, config.moisture.cell_mm, config.moisture.initial) {
  // Row-major: plot id = row * cols + col.
  for (int row = 0; row < config.plot_rows; ++row) {
    for (int col = 0; col < config.plot_cols; ++col) {
      plots.push_back({row * config.plot_cols + col, {col * config.plot_size_mm, row * config.plot_size_mm},
                       config.plot_size_mm});
    }
  }
}

const Plot& FieldState::plot(int id) const {
  if (id < 0 || id >= static_cast<int>(plots.size()))
    throw Error(ErrorCode::kUnknownPlot, "unknown plot " + std::to_string(id), {{"plot_id", id}});
  return plots[static_cast<std::size_t>(id)];
}

std::optional<int> FieldState::plot_at(Coord2 p) const {
  for (const auto& plot : plots) {
    const Coord2 hi = plot.far_corner();
    const bool x_in = p.x_mm >= plot.origin.x_mm && (p.x_mm < hi.x_mm || (p.x_mm == hi.x_mm && hi.x_mm == width_mm));
    const bool y_in = p.y_mm >= plot.origin.y_mm && (p.y_mm < hi.y_mm || (p.y_mm == hi.y_mm && hi.y_mm == depth_mm));
    if (x_in && y_in) return plot.id;
  }
  return std::nullopt;
}

const Plant& FieldState::plant(PlantId id) const {
  const auto it = plants.find(id);
  if (it == plants.end())
    throw Error(ErrorCode::kUnknownPlant, "unknown plant " + std::to_string(id), {{"plant_id", id}});
  return it->second;
}

std::vector<const Plant*> FieldState::live_plants_in_plot(int plot_id) const {
  std::vector<const Plant*> out;
  for (const auto& [id, p] : plants) {
    if (p.live() && p.plot_id == plot_id) out.push_back(&p);
  }
  return out;
}

std::vector<const Plant*> FieldState::live_plants_of(std::string_view owner) const {
  std::vector<const Plant*> out;
  for (const auto& [id, p] : plants) {
    if (p.live() && p.owner == owner) out.push_back(&p);
  }
  return out;
}

PlantId FieldState::add_plant(Plant p) {
  p.id = next_plant_id++;
  const PlantId id = p.id;
  plants.emplace(id, std::move(p));
  return id;
}

void to_json(nlohmann::json& j, const Plant& p) {
  j = {{"id", p.id},
       {"plot_id", p.plot_id},
       {"owner", p.owner},
       {"species_id", p.species_id},
       {"position", p.position},
       {"sown_at", to_micros(p.sown_at)},
       {"sown_day", p.sown_day},
       {"state", to_string(p.state)},
       {"radius_mm", p.radius_mm},
       {"daily_moisture", p.daily_moisture}};
  j["last_watered_at"] = p.last_watered_at ? nlohmann::json(to_micros(*p.last_watered_at)) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, Plant& p) {
  p.id = j.at("id").get<PlantId>();
  p.plot_id = j.at("plot_id").get<int>();
  p.owner = j.at("owner").get<std::string>();
  p.species_id = j.at("species_id").get<std::string>();
  p.position = j.at("position").get<Coord2>();
  p.sown_at = from_micros(j.at("sown_at").get<std::int64_t>());
  p.sown_day = j.at("sown_day").get<int>();
  p.state = plant_state_from_string(j.at("state").get<std::string>());
  p.radius_mm = j.at("radius_mm").get<double>();
  p.daily_moisture = j.at("daily_moisture").get<std::vector<double>>();
  const auto& lw = j.at("last_watered_at");
  p.last_watered_at = lw.is_null() ? std::nullopt : std::optional<Timestamp>(from_micros(lw.get<std::int64_t>()));
}

void to_json(nlohmann::json& j, const FieldState& f) {
  nlohmann::json plots = nlohmann::json::array();
  for (const auto& p : f.plots) plots.push_back({{"id", p.id}, {"origin", p.origin}, {"size_mm", p.size_mm}});
  nlohmann::json plants = nlohmann::json::array();
  for (const auto& [id, p] : f.plants) plants.push_back(p);
  nlohmann::json weeds = nlohmann::json::array();
  for (const auto& [id, w] : f.weeds) weeds.push_back({{"id", w.id}, {"position", w.position}, {"plot_id", w.plot_id}});
  nlohmann::json res = nlohmann::json::array();
  for (const auto& [id, r] : f.reservations)
    res.push_back({{"task_id", r.task_id}, {"owner", r.owner}, {"species_id", r.species_id}, {"position", r.position}});
  j = {{"width_mm", f.width_mm}, {"depth_mm", f.depth_mm},         {"plots", plots},
       {"plants", plants},       {"weeds", weeds},                 {"reservations", res},
       {"soil", f.soil},         {"next_plant_id", f.next_plant_id}, {"next_weed_id", f.next_weed_id}};
}

void from_json(const nlohmann::json& j, FieldState& f) {
  f = FieldState{};
  f.width_mm = j.at("width_mm").get<int>();
  f.depth_mm = j.at("depth_mm").get<int>();
  for (const auto& p : j.at("plots"))
    f.plots.push_back({p.at("id").get<int>(), p.at("origin").get<Coord2>(), p.at("size_mm").get<int>()});
  for (const auto& p : j.at("plants")) {
    auto plant = p.get<Plant>();
    f.plants.emplace(plant.id, std::move(plant));
  }
  for (const auto& w : j.at("weeds")) {
    WeedMark m{w.at("id").get<std::int64_t>(), w.at("position").get<Coord2>(), w.at("plot_id").get<int>()};
    f.weeds.emplace(m.id, m);
  }
  for (const auto& r : j.at("reservations")) {
    Reservation res{r.at("task_id").get<TaskId>(), r.at("owner").get<std::string>(),
                    r.at("species_id").get<std::string>(), r.at("position").get<Coord2>()};
    f.reservations.emplace(res.task_id, res);
  }
  f.soil = j.at("soil").get<gantry::SoilGrid>();
  f.next_plant_id = j.at("next_plant_id").get<PlantId>();
  f.next_weed_id = j.at("next_weed_id").get<std::int64_t>();
}

}  // namespace plotbot::field

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

#include "plotbot/policy/species.hpp"

#include <fstream>

#include "plotbot/error.hpp"

namespace plotbot::policy {

SpeciesCatalog::SpeciesCatalog(std::vector<SpeciesSpec> species) {
  for (auto& s : species) {
    if (s.species_id.empty()) throw Error(ErrorCode::kInvalidConfig, "species without id");
    if (s.germination_days < 0 || s.spread_radius_mm <= 0 || s.water_volume_ml < 0 || s.seed_depth_mm < 0)
      throw Error(ErrorCode::kInvalidConfig, "species '" + s.species_id + "' has out-of-range parameters");
    if (s.moisture_threshold < 0 || s.moisture_threshold > 1)
      throw Error(ErrorCode::kInvalidConfig, "species '" + s.species_id + "' threshold outside [0,1]");
    const std::string id = s.species_id;
    if (!species_.emplace(id, std::move(s)).second)
      throw Error(ErrorCode::kInvalidConfig, "duplicate species '" + id + "'");
  }
}

SpeciesCatalog SpeciesCatalog::defaults() {
  return SpeciesCatalog({
      {"lettuce", "Lettuce", 7, 125, 0.40, 150.0, 10},
      {"radish", "Radish", 4, 50, 0.35, 100.0, 10},
      {"cornflower", "Cornflower", 8, 100, 0.30, 100.0, 5},
      {"marigold", "Marigold", 6, 100, 0.30, 100.0, 5},
      {"cumin", "Cumin", 10, 75, 0.35, 80.0, 5},
  });
}

SpeciesCatalog SpeciesCatalog::from_json(const nlohmann::json& j) {
  std::vector<SpeciesSpec> out;
  const auto& list = j.is_object() && j.contains("species") ? j.at("species") : j;
  if (!list.is_array()) throw Error(ErrorCode::kInvalidConfig, "species config must be an array");
  for (const auto& e : list) {
    SpeciesSpec s;
    s.species_id = e.at("species_id").get<std::string>();
    s.display_name = e.value("display_name", s.species_id);
    s.germination_days = e.at("germination_days").get<int>();
    s.spread_radius_mm = e.at("spread_radius_mm").get<int>();
    s.moisture_threshold = e.at("moisture_threshold").get<double>();
    s.water_volume_ml = e.at("water_volume_ml").get<double>();
    s.seed_depth_mm = e.value("seed_depth_mm", 10);
    out.push_back(std::move(s));
  }
  return SpeciesCatalog(std::move(out));
}

SpeciesCatalog SpeciesCatalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open species config " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
}

const SpeciesSpec& SpeciesCatalog::at(const std::string& id) const {
  const auto it = species_.find(id);
  if (it == species_.end()) throw Error(ErrorCode::kUnknownSpecies, "unknown species '" + id + "'");
  return it->second;
}

std::vector<std::string> SpeciesCatalog::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, s] : species_) out.push_back(id);
  return out;
}

nlohmann::json SpeciesCatalog::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& [id, s] : species_) {
    list.push_back({{"species_id", s.species_id},
                    {"display_name", s.display_name},
                    {"germination_days", s.germination_days},
                    {"spread_radius_mm", s.spread_radius_mm},
                    {"moisture_threshold", s.moisture_threshold},
                    {"water_volume_ml", s.water_volume_ml},
                    {"seed_depth_mm", s.seed_depth_mm}});
  }
  return {{"species", list}};
}

}  // namespace plotbot::policy

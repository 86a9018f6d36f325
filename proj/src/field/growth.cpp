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

#include "plotbot/field/growth.hpp"

#include <algorithm>
#include <numeric>

namespace plotbot::field {

double moisture_factor(double moisture, double species_threshold, const GrowthConfig& cfg) {
  if (species_threshold <= 0.0) return 1.0;
  return std::clamp(moisture / species_threshold, cfg.min_moisture_factor, 1.0);
}

double logistic_step(double radius, double spread_radius, double growth_rate, double factor) {
  const double next = radius + growth_rate * factor * radius * (1.0 - radius / spread_radius);
  return std::clamp(next, radius, spread_radius);
}

GrowthReport growth_tick(FieldState& field, const policy::SpeciesCatalog& species, int day_index,
                         const GrowthConfig& cfg) {
  GrowthReport report;
  for (auto& [id, plant] : field.plants) {
    if (!plant.live()) continue;
    const auto& spec = species.at(plant.species_id);
    const double moisture = field.soil.at(plant.position);
    plant.daily_moisture.push_back(moisture);

    switch (plant.state) {
      case PlantState::sown: {
        const int age = day_index - plant.sown_day;
        if (age < spec.germination_days) break;
        const std::size_t window = std::min<std::size_t>(
            plant.daily_moisture.size(), static_cast<std::size_t>(std::max(spec.germination_days, 1)));
        const double mean =
            std::accumulate(plant.daily_moisture.end() - static_cast<std::ptrdiff_t>(window), plant.daily_moisture.end(), 0.0) /
            static_cast<double>(window);
        if (mean >= cfg.viability_threshold) {
          plant.state = PlantState::germinated;
          plant.radius_mm = cfg.initial_fraction * spec.spread_radius_mm;
          report.germinated.push_back(id);
        }
        break;
      }
      case PlantState::germinated:
      case PlantState::growing: {
        plant.radius_mm = logistic_step(plant.radius_mm, spec.spread_radius_mm, cfg.rate_per_day,
                                        moisture_factor(moisture, spec.moisture_threshold, cfg));
        plant.state = PlantState::growing;
        report.grown.push_back(id);
        break;
      }
      case PlantState::removed:
        break;
    }
  }
  return report;
}

double germination_rate(const FieldState& field) {
  if (field.plants.empty()) return 0.0;
  const auto up = std::count_if(field.plants.begin(), field.plants.end(), [](const auto& kv) {
    return kv.second.state == PlantState::germinated || kv.second.state == PlantState::growing;
  });
  return static_cast<double>(up) / static_cast<double>(field.plants.size());
}

void to_json(nlohmann::json& j, const GrowthConfig& c) {
  j = {{"rate_per_day", c.rate_per_day},
       {"viability_threshold", c.viability_threshold},
       {"initial_fraction", c.initial_fraction},
       {"min_moisture_factor", c.min_moisture_factor}};
}

void from_json(const nlohmann::json& j, GrowthConfig& c) {
  GrowthConfig d;
  c.rate_per_day = j.value("rate_per_day", d.rate_per_day);
  c.viability_threshold = j.value("viability_threshold", d.viability_threshold);
  c.initial_fraction = j.value("initial_fraction", d.initial_fraction);
  c.min_moisture_factor = j.value("min_moisture_factor", d.min_moisture_factor);
}

}  // namespace plotbot::field

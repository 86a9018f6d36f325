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

#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/field/field_state.hpp"
#include "plotbot/policy/species.hpp"

namespace plotbot::field {

struct GrowthConfig {
  double rate_per_day = 0.25;          // logistic g
  double viability_threshold = 0.3;    // mean moisture needed over the germination window
  double initial_fraction = 0.1;       // radius at germination, fraction of spread radius
  double min_moisture_factor = 0.25;
};

// clamp(moisture / species threshold, min_moisture_factor, 1).
double moisture_factor(double moisture, double species_threshold, const GrowthConfig& cfg);

// One logistic step r + g f r (1 - r / R); never shrinks, never exceeds R.
double logistic_step(double radius, double spread_radius, double growth_rate, double factor);

struct GrowthReport {
  std::vector<PlantId> germinated;
  std::vector<PlantId> grown;
};

// End-of-day update for `day_index`. Each live plant records today's soil
// moisture. Sown plants whose age (day_index - sown_day) reached the
// species germination days and whose mean moisture over the last
// germination_days samples meets the viability threshold germinate at
// initial_fraction x spread radius. Germinated and growing plants take one
// logistic step scaled by today's moisture factor.
GrowthReport growth_tick(FieldState& field, const policy::SpeciesCatalog& species, int day_index,
                         const GrowthConfig& cfg);

// (#germinated + #growing) / #plants ever sown; 0 when nothing was sown.
double germination_rate(const FieldState& field);

void to_json(nlohmann::json& j, const GrowthConfig& c);
void from_json(const nlohmann::json& j, GrowthConfig& c);

}  // namespace plotbot::field

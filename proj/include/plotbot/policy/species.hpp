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

#include <istream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace plotbot::policy {

struct SpeciesSpec {
  std::string species_id;
  std::string display_name;
  int germination_days = 7;
  int spread_radius_mm = 100;
  double moisture_threshold = 0.35;  // planner waters below this
  double water_volume_ml = 100.0;
  int seed_depth_mm = 10;
};

class SpeciesCatalog {
 public:
  SpeciesCatalog() = default;
  explicit SpeciesCatalog(std::vector<SpeciesSpec> species);

  // lettuce, radish, cornflower, marigold, cumin.
  static SpeciesCatalog defaults();
  static SpeciesCatalog from_json(const nlohmann::json& j);
  static SpeciesCatalog load(const std::string& path);

  bool contains(const std::string& id) const { return species_.contains(id); }
  // Throws Error(kUnknownSpecies).
  const SpeciesSpec& at(const std::string& id) const;
  const std::map<std::string, SpeciesSpec>& all() const { return species_; }
  std::vector<std::string> ids() const;

  nlohmann::json to_json() const;

 private:
  std::map<std::string, SpeciesSpec> species_;
};

}  // namespace plotbot::policy

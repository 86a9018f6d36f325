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

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/gantry/config.hpp"

namespace plotbot::gantry {

struct CellIndex {
  int col = 0;
  int row = 0;
  auto operator<=>(const CellIndex&) const = default;
};

// Per-cell soil moisture over the bed. Every mutation clamps to [0,1].
class SoilGrid {
 public:
  SoilGrid() = default;
  SoilGrid(int width_mm, int depth_mm, int cell_mm, double initial);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  int cell_mm() const { return cell_mm_; }

  CellIndex cell_at(Coord2 p) const;
  Coord2 cell_center(CellIndex c) const;
  double at(CellIndex c) const { return values_[offset(c)]; }
  double at(Coord2 p) const { return at(cell_at(p)); }
  void set(CellIndex c, double value);

  // Adds `amount` to every cell whose center lies within `radius_mm` of
  // `center` (the containing cell when none does). Returns touched cells.
  std::vector<CellIndex> add_within(Coord2 center, int radius_mm, double amount);

  // m <- clamp(m * factor + gain) for every cell.
  void scale_and_add(double factor, double gain);

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }

  bool operator==(const SoilGrid&) const = default;

 private:
  std::size_t offset(CellIndex c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c.col);
  }

  int cols_ = 0;
  int rows_ = 0;
  int cell_mm_ = 100;
  std::vector<double> values_;
};

double clamp_unit(double v);

void to_json(nlohmann::json& j, const SoilGrid& g);
void from_json(const nlohmann::json& j, SoilGrid& g);

}  // namespace plotbot::gantry

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

#include "plotbot/gantry/soil.hpp"

#include <algorithm>

#include "plotbot/error.hpp"

namespace plotbot::gantry {

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

SoilGrid::SoilGrid(int width_mm, int depth_mm, int cell_mm, double initial)
    : cols_((width_mm + cell_mm - 1) / cell_mm),
      rows_((depth_mm + cell_mm - 1) / cell_mm),
      cell_mm_(cell_mm),
      values_(static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_), clamp_unit(initial)) {}

CellIndex SoilGrid::cell_at(Coord2 p) const {
  return {std::clamp(p.x_mm / cell_mm_, 0, cols_ - 1), std::clamp(p.y_mm / cell_mm_, 0, rows_ - 1)};
}

Coord2 SoilGrid::cell_center(CellIndex c) const {
  return {c.col * cell_mm_ + cell_mm_ / 2, c.row * cell_mm_ + cell_mm_ / 2};
}

void SoilGrid::set(CellIndex c, double value) {
  if (c.col < 0 || c.col >= cols_ || c.row < 0 || c.row >= rows_)
    throw Error(ErrorCode::kOutOfBounds, "soil cell outside grid");
  values_[offset(c)] = clamp_unit(value);
}

std::vector<CellIndex> SoilGrid::add_within(Coord2 center, int radius_mm, double amount) {
  std::vector<CellIndex> touched;
  const std::int64_t r2 = static_cast<std::int64_t>(radius_mm) * radius_mm;
  const CellIndex lo = cell_at({center.x_mm - radius_mm, center.y_mm - radius_mm});
  const CellIndex hi = cell_at({center.x_mm + radius_mm, center.y_mm + radius_mm});
  for (int row = lo.row; row <= hi.row; ++row) {
    for (int col = lo.col; col <= hi.col; ++col) {
      const CellIndex c{col, row};
      if (squared_distance(cell_center(c), center) <= r2) touched.push_back(c);
    }
  }
  if (touched.empty()) touched.push_back(cell_at(center));
  for (const auto& c : touched) values_[offset(c)] = clamp_unit(values_[offset(c)] + amount);
  return touched;
}

void SoilGrid::scale_and_add(double factor, double gain) {
  for (double& v : values_) v = clamp_unit(v * factor + gain);
}

void to_json(nlohmann::json& j, const SoilGrid& g) {
  j = {{"cols", g.cols()}, {"rows", g.rows()}, {"cell_mm", g.cell_mm()}, {"values", g.values()}};
}

void from_json(const nlohmann::json& j, SoilGrid& g) {
  const int cols = j.at("cols").get<int>();
  const int rows = j.at("rows").get<int>();
  const int cell = j.at("cell_mm").get<int>();
  g = SoilGrid(cols * cell, rows * cell, cell, 0.0);
  const auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != g.values().size()) throw Error(ErrorCode::kInvalidArgument, "soil grid size mismatch");
  std::copy(values.begin(), values.end(), g.mutable_values().begin());
}

}  // namespace plotbot::gantry

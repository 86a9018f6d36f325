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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/field/field_state.hpp"
#include "plotbot/time.hpp"

namespace plotbot::field {

enum class Perspective { topdown, cameraA, cameraB, cameraC };
enum class RenderStyle { abstract, photo_grid };

std::string_view to_string(Perspective p) noexcept;
std::string_view to_string(RenderStyle s) noexcept;
// Both throw Error(kInvalidArgument).
Perspective perspective_from_string(std::string_view s);
RenderStyle style_from_string(std::string_view s);

struct PlantMark {
  PlantId id = 0;
  int plot_id = 0;
  std::string species_id;
  Coord2 position;
  double radius_mm = 0.0;
  PlantState state = PlantState::sown;

  bool operator==(const PlantMark&) const = default;
};

// Structured layer of a view: the moisture cells inside the window plus
// the plant and weed marks. Rasters are rendered from this on demand.
struct SnapshotFrame {
  int day_index = 0;
  Timestamp captured_at{};
  Perspective perspective = Perspective::topdown;
  std::optional<int> plot_id;  // set when cropped to a plot
  Coord2 origin;               // window corner in field mm
  int width_mm = 0;
  int depth_mm = 0;
  int cell_mm = 100;
  int cols = 0;
  int rows = 0;
  std::vector<double> moisture;  // rows x cols, row-major
  std::vector<PlantMark> plants;
  std::vector<Coord2> weeds;
  std::optional<Coord3> gantry;

  double moisture_cell(int col, int row) const {
    return moisture[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(col)];
  }
  bool operator==(const SnapshotFrame&) const = default;
};

// Window of each perspective. topdown and cameraA cover the field, cameraB
// the tool bay corner, cameraC a window that follows the gantry head.
struct ViewWindow {
  Coord2 origin;
  int width_mm = 0;
  int depth_mm = 0;
};
ViewWindow view_window(const FieldState& field, Perspective p, std::optional<Coord3> gantry);

SnapshotFrame capture_frame(const FieldState& field, int day_index, Timestamp at,
                            Perspective perspective = Perspective::topdown,
                            std::optional<Coord3> gantry = std::nullopt);

// Keeps only the cells of the plot and the plants owned by it.
SnapshotFrame crop(const SnapshotFrame& frame, const Plot& plot);

struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::array<std::uint8_t, 3> pixel(int x, int y) const {
    const auto o = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    return {rgb[o], rgb[o + 1], rgb[o + 2]};
  }
};

Raster render(const SnapshotFrame& frame, RenderStyle style, int mm_per_px = 10);
std::string encode_ppm(const Raster& raster);

// Orders frames by capture time and crops them to `plot` if given.
// Throws Error(kNoFrames) when nothing is left.
std::vector<SnapshotFrame> assemble_timelapse(std::span<const SnapshotFrame> frames,
                                              const std::optional<Plot>& plot);

// Writes frame_NNN.ppm files plus manifest.json into `dir`.
nlohmann::json export_timelapse(const std::filesystem::path& dir, std::span<const SnapshotFrame> frames,
                                RenderStyle style, int mm_per_px = 10);

void to_json(nlohmann::json& j, const PlantMark& m);
void from_json(const nlohmann::json& j, PlantMark& m);
void to_json(nlohmann::json& j, const SnapshotFrame& f);
void from_json(const nlohmann::json& j, SnapshotFrame& f);

}  // namespace plotbot::field

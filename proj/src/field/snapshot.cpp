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

#include "plotbot/field/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "plotbot/error.hpp"

namespace plotbot::field {

namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr int kCameraBWidth = 2000;
constexpr int kCameraBDepth = 1500;
constexpr int kCameraCWidth = 1500;
constexpr int kCameraCDepth = 1000;
constexpr double kObliqueScale = 0.6;  // cameraA foreshortening along y

int floor_to(int v, int step) { return v - ((v % step) + step) % step; }

std::uint32_t mix(std::uint32_t h) {
  h ^= h >> 16;
  h *= 0x7feb352dU;
  h ^= h >> 15;
  h *= 0x846ca68bU;
  h ^= h >> 16;
  return h;
}

std::uint32_t hash_str(std::string_view s) {
  std::uint32_t h = 2166136261U;
  for (const char c : s) h = (h ^ static_cast<std::uint8_t>(c)) * 16777619U;
  return h;
}

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Rgb lerp(Rgb a, Rgb b, double t) {
  t = std::clamp(t, 0.0, 1.0);
  return {to_u8(a[0] + (b[0] - a[0]) * t), to_u8(a[1] + (b[1] - a[1]) * t), to_u8(a[2] + (b[2] - a[2]) * t)};
}

Rgb soil_color(double moisture) { return lerp({194, 160, 110}, {70, 50, 35}, moisture); }

Rgb species_color(std::string_view species) {
  static constexpr Rgb kPalette[] = {{46, 160, 67},  {214, 40, 160}, {60, 110, 220}, {240, 160, 20},
                                     {150, 90, 200}, {20, 170, 170}, {200, 60, 50},  {120, 180, 40}};
  return kPalette[hash_str(species) % std::size(kPalette)];
}

class Canvas {
 public:
  Canvas(const SnapshotFrame& f, int mm_per_px)
      : frame_(f), mm_per_px_(mm_per_px),
        y_scale_(f.perspective == Perspective::cameraA ? kObliqueScale : 1.0) {
    raster_.width = std::max(1, f.width_mm / mm_per_px);
    raster_.height = std::max(1, static_cast<int>(std::lround(f.depth_mm * y_scale_ / mm_per_px)));
    raster_.rgb.assign(static_cast<std::size_t>(raster_.width) * static_cast<std::size_t>(raster_.height) * 3, 0);
  }

  int width() const { return raster_.width; }
  int height() const { return raster_.height; }
  double x_mm(int px) const { return frame_.origin.x_mm + (px + 0.5) * mm_per_px_; }
  double y_mm(int py) const { return frame_.origin.y_mm + (py + 0.5) * mm_per_px_ / y_scale_; }

  void put(int px, int py, Rgb c) {
    if (px < 0 || py < 0 || px >= raster_.width || py >= raster_.height) return;
    const auto o = (static_cast<std::size_t>(py) * static_cast<std::size_t>(raster_.width) + static_cast<std::size_t>(px)) * 3;
    raster_.rgb[o] = c[0];
    raster_.rgb[o + 1] = c[1];
    raster_.rgb[o + 2] = c[2];
  }

  double cell_moisture(double x, double y) const {
    const int col = std::clamp(static_cast<int>((x - frame_.origin.x_mm) / frame_.cell_mm), 0, frame_.cols - 1);
    const int row = std::clamp(static_cast<int>((y - frame_.origin.y_mm) / frame_.cell_mm), 0, frame_.rows - 1);
    return frame_.cols > 0 && frame_.rows > 0 ? frame_.moisture_cell(col, row) : 0.0;
  }

  // Calls shade(distance / radius) for every pixel inside the disc.
  template <typename F>
  void disc(Coord2 c, double radius_mm, F shade) {
    const int px0 = static_cast<int>(std::floor((c.x_mm - radius_mm - frame_.origin.x_mm) / mm_per_px_));
    const int px1 = static_cast<int>(std::ceil((c.x_mm + radius_mm - frame_.origin.x_mm) / mm_per_px_));
    const int py0 = static_cast<int>(std::floor((c.y_mm - radius_mm - frame_.origin.y_mm) * y_scale_ / mm_per_px_));
    const int py1 = static_cast<int>(std::ceil((c.y_mm + radius_mm - frame_.origin.y_mm) * y_scale_ / mm_per_px_));
    for (int py = std::max(py0, 0); py <= std::min(py1, raster_.height - 1); ++py) {
      for (int px = std::max(px0, 0); px <= std::min(px1, raster_.width - 1); ++px) {
        const double d = std::hypot(x_mm(px) - c.x_mm, y_mm(py) - c.y_mm);
        if (d <= radius_mm) put(px, py, shade(d / radius_mm));
      }
    }
  }

  Raster take() { return std::move(raster_); }

 private:
  const SnapshotFrame& frame_;
  int mm_per_px_;
  double y_scale_;
  Raster raster_;
};

void draw_abstract(Canvas& cv, const SnapshotFrame& f, int mm_per_px) {
  for (int py = 0; py < cv.height(); ++py) {
    for (int px = 0; px < cv.width(); ++px) {
      const double x = cv.x_mm(px), y = cv.y_mm(py);
      const bool border = std::fmod(x, 1000.0) < mm_per_px || std::fmod(y, 1000.0) < mm_per_px;
      cv.put(px, py, border ? Rgb{90, 90, 90} : soil_color(cv.cell_moisture(x, y)));
    }
  }
  for (const auto& p : f.plants) {
    if (p.state == PlantState::sown) {
      cv.disc(p.position, 12.0, [](double) { return Rgb{240, 230, 140}; });
    } else {
      const Rgb c = species_color(p.species_id);
      cv.disc(p.position, std::max(p.radius_mm, 8.0), [c](double) { return c; });
    }
  }
  for (const auto& w : f.weeds) cv.disc(w, 20.0, [](double) { return Rgb{220, 30, 30}; });
  if (f.gantry) cv.disc(f.gantry->xy(), 30.0, [](double t) { return t > 0.6 ? Rgb{255, 0, 255} : Rgb{255, 255, 255}; });
}

void draw_photo(Canvas& cv, const SnapshotFrame& f) {
  for (int py = 0; py < cv.height(); ++py) {
    for (int px = 0; px < cv.width(); ++px) {
      const double x = cv.x_mm(px), y = cv.y_mm(py);
      const auto grain = mix(static_cast<std::uint32_t>(x / 5.0) * 73856093U ^ static_cast<std::uint32_t>(y / 5.0) * 19349663U);
      const double jitter = static_cast<double>(grain % 25) - 12.0;
      const Rgb base = soil_color(cv.cell_moisture(x, y));
      cv.put(px, py, {to_u8(base[0] + jitter), to_u8(base[1] + jitter), to_u8(base[2] + jitter * 0.8)});
    }
  }
  for (const auto& p : f.plants) {
    if (p.state == PlantState::sown) continue;  // seeds are not visible from above
    const double hue = static_cast<double>(hash_str(p.species_id) % 40);
    cv.disc(p.position, std::max(p.radius_mm, 6.0), [hue](double t) {
      return lerp({static_cast<std::uint8_t>(60 + hue), 170, 60}, {30, 90, 30}, t * t);
    });
  }
  for (const auto& w : f.weeds) cv.disc(w, 18.0, [](double t) { return lerp({110, 120, 40}, {60, 70, 20}, t); });
}

}  // namespace

std::string_view to_string(Perspective p) noexcept {
  switch (p) {
    case Perspective::topdown: return "topdown";
    case Perspective::cameraA: return "cameraA";
    case Perspective::cameraB: return "cameraB";
    case Perspective::cameraC: return "cameraC";
  }
  return "topdown";
}

std::string_view to_string(RenderStyle s) noexcept {
  return s == RenderStyle::abstract ? "abstract" : "photo_grid";
}

Perspective perspective_from_string(std::string_view s) {
  for (const auto p : {Perspective::topdown, Perspective::cameraA, Perspective::cameraB, Perspective::cameraC})
    if (to_string(p) == s) return p;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown perspective '{}'", s));
}

RenderStyle style_from_string(std::string_view s) {
  if (s == "abstract") return RenderStyle::abstract;
  if (s == "photo_grid") return RenderStyle::photo_grid;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown render style '{}'", s));
}

ViewWindow view_window(const FieldState& field, Perspective p, std::optional<Coord3> gantry) {
  switch (p) {
    case Perspective::topdown:
    case Perspective::cameraA:
      return {{0, 0}, field.width_mm, field.depth_mm};
    case Perspective::cameraB:
      return {{0, 0}, std::min(kCameraBWidth, field.width_mm), std::min(kCameraBDepth, field.depth_mm)};
    case Perspective::cameraC: {
      const int w = std::min(kCameraCWidth, field.width_mm), d = std::min(kCameraCDepth, field.depth_mm);
      const Coord2 head = gantry ? gantry->xy() : Coord2{0, 0};
      const int step = std::max(field.soil.cell_mm(), 1);
      const int x = std::clamp(floor_to(head.x_mm - w / 2, step), 0, field.width_mm - w);
      const int y = std::clamp(floor_to(head.y_mm - d / 2, step), 0, field.depth_mm - d);
      return {{x, y}, w, d};
    }
  }
  return {{0, 0}, field.width_mm, field.depth_mm};
}

SnapshotFrame capture_frame(const FieldState& field, int day_index, Timestamp at, Perspective perspective,
                            std::optional<Coord3> gantry) {
  const auto win = view_window(field, perspective, gantry);
  SnapshotFrame f;
  f.day_index = day_index;
  f.captured_at = at;
  f.perspective = perspective;
  f.origin = win.origin;
  f.width_mm = win.width_mm;
  f.depth_mm = win.depth_mm;
  f.cell_mm = field.soil.cell_mm();
  f.gantry = gantry;

  const int c0 = win.origin.x_mm / f.cell_mm, r0 = win.origin.y_mm / f.cell_mm;
  const int c1 = std::min(field.soil.cols(), (win.origin.x_mm + win.width_mm + f.cell_mm - 1) / f.cell_mm);
  const int r1 = std::min(field.soil.rows(), (win.origin.y_mm + win.depth_mm + f.cell_mm - 1) / f.cell_mm);
  f.cols = std::max(0, c1 - c0);
  f.rows = std::max(0, r1 - r0);
  f.moisture.reserve(static_cast<std::size_t>(f.cols) * static_cast<std::size_t>(f.rows));
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) f.moisture.push_back(field.soil.at(gantry::CellIndex{c, r}));

  const auto inside = [&](Coord2 p) {
    return p.x_mm >= win.origin.x_mm && p.x_mm <= win.origin.x_mm + win.width_mm && p.y_mm >= win.origin.y_mm &&
           p.y_mm <= win.origin.y_mm + win.depth_mm;
  };
  for (const auto& [id, p] : field.plants) {
    if (!p.live() || !inside(p.position)) continue;
    f.plants.push_back({id, p.plot_id, p.species_id, p.position, p.radius_mm, p.state});
  }
  for (const auto& [id, w] : field.weeds)
    if (inside(w.position)) f.weeds.push_back(w.position);
  return f;
}

SnapshotFrame crop(const SnapshotFrame& frame, const Plot& plot) {
  SnapshotFrame out = frame;
  out.plot_id = plot.id;
  const int x0 = std::max(plot.origin.x_mm, frame.origin.x_mm);
  const int y0 = std::max(plot.origin.y_mm, frame.origin.y_mm);
  const int x1 = std::min(plot.origin.x_mm + plot.size_mm, frame.origin.x_mm + frame.width_mm);
  const int y1 = std::min(plot.origin.y_mm + plot.size_mm, frame.origin.y_mm + frame.depth_mm);
  out.origin = {x0, y0};
  out.width_mm = std::max(0, x1 - x0);
  out.depth_mm = std::max(0, y1 - y0);

  const int c0 = (x0 - frame.origin.x_mm) / frame.cell_mm, r0 = (y0 - frame.origin.y_mm) / frame.cell_mm;
  const int c1 = std::min(frame.cols, (x1 - frame.origin.x_mm + frame.cell_mm - 1) / frame.cell_mm);
  const int r1 = std::min(frame.rows, (y1 - frame.origin.y_mm + frame.cell_mm - 1) / frame.cell_mm);
  out.cols = std::max(0, c1 - c0);
  out.rows = std::max(0, r1 - r0);
  out.moisture.clear();
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) out.moisture.push_back(frame.moisture_cell(c, r));

  out.plants.clear();
  for (const auto& p : frame.plants)
    if (p.plot_id == plot.id) out.plants.push_back(p);
  out.weeds.clear();
  for (const auto& w : frame.weeds)
    if (plot.contains(w)) out.weeds.push_back(w);
  if (out.gantry && !plot.contains(out.gantry->xy())) out.gantry.reset();
  return out;
}

Raster render(const SnapshotFrame& frame, RenderStyle style, int mm_per_px) {
  if (mm_per_px < 1) throw Error(ErrorCode::kInvalidArgument, "mm_per_px must be positive");
  Canvas cv(frame, mm_per_px);
  if (style == RenderStyle::abstract) {
    draw_abstract(cv, frame, mm_per_px);
  } else {
    draw_photo(cv, frame);
  }
  return cv.take();
}

std::string encode_ppm(const Raster& r) {
  std::string out = fmt::format("P6\n{} {}\n255\n", r.width, r.height);
  out.append(reinterpret_cast<const char*>(r.rgb.data()), r.rgb.size());
  return out;
}

std::vector<SnapshotFrame> assemble_timelapse(std::span<const SnapshotFrame> frames, const std::optional<Plot>& plot) {
  if (frames.empty()) throw Error(ErrorCode::kNoFrames, "no snapshot frames recorded yet");
  std::vector<SnapshotFrame> out(frames.begin(), frames.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const SnapshotFrame& a, const SnapshotFrame& b) { return a.captured_at < b.captured_at; });
  if (plot)
    for (auto& f : out) f = crop(f, *plot);
  return out;
}

nlohmann::json export_timelapse(const std::filesystem::path& dir, std::span<const SnapshotFrame> frames,
                                RenderStyle style, int mm_per_px) {
  if (frames.empty()) throw Error(ErrorCode::kNoFrames, "no snapshot frames to export");
  std::filesystem::create_directories(dir);
  nlohmann::json manifest = {{"style", to_string(style)}, {"mm_per_px", mm_per_px}, {"frames", nlohmann::json::array()}};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto name = fmt::format("frame_{:03}.ppm", i);
    std::ofstream(dir / name, std::ios::binary) << encode_ppm(render(frames[i], style, mm_per_px));
    manifest["frames"].push_back({{"file", name},
                                  {"day_index", frames[i].day_index},
                                  {"captured_at", format_iso8601(frames[i].captured_at)},
                                  {"plot_id", frames[i].plot_id ? nlohmann::json(*frames[i].plot_id) : nlohmann::json()}});
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  return manifest;
}

void to_json(nlohmann::json& j, const PlantMark& m) {
  j = {{"id", m.id},
       {"plot_id", m.plot_id},
       {"species_id", m.species_id},
       {"position", m.position},
       {"radius_mm", m.radius_mm},
       {"state", to_string(m.state)}};
}

void from_json(const nlohmann::json& j, PlantMark& m) {
  m.id = j.at("id").get<PlantId>();
  m.plot_id = j.at("plot_id").get<int>();
  m.species_id = j.at("species_id").get<std::string>();
  m.position = j.at("position").get<Coord2>();
  m.radius_mm = j.at("radius_mm").get<double>();
  m.state = plant_state_from_string(j.at("state").get<std::string>());
}

void to_json(nlohmann::json& j, const SnapshotFrame& f) {
  j = {{"day_index", f.day_index},
       {"captured_at", format_iso8601(f.captured_at)},
       {"captured_at_us", to_micros(f.captured_at)},
       {"perspective", to_string(f.perspective)},
       {"plot_id", f.plot_id ? nlohmann::json(*f.plot_id) : nlohmann::json()},
       {"origin", f.origin},
       {"width_mm", f.width_mm},
       {"depth_mm", f.depth_mm},
       {"cell_mm", f.cell_mm},
       {"cols", f.cols},
       {"rows", f.rows},
       {"moisture", f.moisture},
       {"plants", f.plants},
       {"weeds", f.weeds},
       {"gantry", f.gantry ? nlohmann::json(*f.gantry) : nlohmann::json()}};
}

void from_json(const nlohmann::json& j, SnapshotFrame& f) {
  f.day_index = j.at("day_index").get<int>();
  f.captured_at = from_micros(j.at("captured_at_us").get<std::int64_t>());
  f.perspective = perspective_from_string(j.at("perspective").get<std::string>());
  f.plot_id = j.at("plot_id").is_null() ? std::nullopt : std::optional<int>(j.at("plot_id").get<int>());
  f.origin = j.at("origin").get<Coord2>();
  f.width_mm = j.at("width_mm").get<int>();
  f.depth_mm = j.at("depth_mm").get<int>();
  f.cell_mm = j.at("cell_mm").get<int>();
  f.cols = j.at("cols").get<int>();
  f.rows = j.at("rows").get<int>();
  f.moisture = j.at("moisture").get<std::vector<double>>();
  f.plants = j.at("plants").get<std::vector<PlantMark>>();
  f.weeds = j.at("weeds").get<std::vector<Coord2>>();
  f.gantry = j.at("gantry").is_null() ? std::nullopt : std::optional<Coord3>(j.at("gantry").get<Coord3>());
}

}  // namespace plotbot::field

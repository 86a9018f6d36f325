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

#include "plotbot/tasks/compiler.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "plotbot/error.hpp"
#include "plotbot/overloaded.hpp"

namespace plotbot::tasks {

using gantry::Tool;

namespace {

Coord3 raised(Coord2 p) { return {p.x_mm, p.y_mm, 0}; }
Coord3 at_depth(Coord2 p, int z) { return {p.x_mm, p.y_mm, z}; }

class StepBuilder {
 public:
  explicit StepBuilder(const gantry::GantryState& gantry) {
    if (gantry.mounted_tool != Tool::none) steps_.push_back(Unmount{});
  }

  StepBuilder& move(Coord3 c) {
    steps_.push_back(MoveTo{c});
    return *this;
  }
  StepBuilder& mount(Tool t) {
    steps_.push_back(Mount{t});
    return *this;
  }
  StepBuilder& unmount() {
    steps_.push_back(Unmount{});
    return *this;
  }
  StepBuilder& act(gantry::Action a, std::optional<PlantId> plant = std::nullopt) {
    steps_.push_back(Actuate{std::move(a), plant});
    return *this;
  }

  std::vector<PrimitiveStep> take() && { return std::move(steps_); }

 private:
  std::vector<PrimitiveStep> steps_;
};

Coord3 bay_slot(const gantry::FieldConfig& cfg, Tool tool) {
  const auto it = cfg.tool_bay_slots.find(tool);
  if (it == cfg.tool_bay_slots.end())
    throw Error(ErrorCode::kUnknownTool, fmt::format("no bay slot for {}", gantry::to_string(tool)));
  return it->second;
}

std::vector<PrimitiveStep> compile_sow(const Sow& sow, const CompileContext& ctx, StepBuilder b) {
  const auto& spec = ctx.species.at(sow.species);
  const auto container = ctx.field_config.seed_containers.find(sow.species);
  if (container == ctx.field_config.seed_containers.end())
    throw Error(ErrorCode::kUnknownSpecies, "no seed container for '" + sow.species + "'");
  if (!sow.target) throw Error(ErrorCode::kInvalidArgument, "sow target not placed");
  const Coord2 target = *sow.target;
  const Coord3 box = container->second;
  const int depth = std::min(ctx.field_config.soil_z_mm + spec.seed_depth_mm, ctx.field_config.z_max_mm);
  return std::move(b.mount(Tool::seeder)
                       .move(raised(box.xy()))
                       .move(box)
                       .act(gantry::VacuumPick{sow.species})
                       .move(raised(box.xy()))
                       .move(raised(target))
                       .move(at_depth(target, depth))
                       .act(gantry::VacuumRelease{})
                       .move(raised(target))
                       .unmount())
      .take();
}

std::vector<PrimitiveStep> compile_water(const Water& water, const CompileContext& ctx, StepBuilder b) {
  std::vector<std::pair<PlantId, Coord2>> targets;
  for (const PlantId id : water.plants) {
    if (std::any_of(targets.begin(), targets.end(), [&](const auto& t) { return t.first == id; })) continue;
    const auto& plant = ctx.field.plant(id);
    if (!plant.live())
      throw Error(ErrorCode::kUnknownPlant, fmt::format("plant {} was removed", id), {{"plant_id", id}});
    targets.emplace_back(id, plant.position);
  }
  if (targets.empty()) throw Error(ErrorCode::kEmptyTargetList, "water task has no targets");

  const Coord3 nozzle = bay_slot(ctx.field_config, Tool::watering_nozzle);
  b.mount(Tool::watering_nozzle);
  for (const PlantId id : nearest_neighbor_order(nozzle.xy(), targets)) {
    const auto& plant = ctx.field.plant(id);
    const auto& spec = ctx.species.at(plant.species_id);
    b.move(at_depth(plant.position, ctx.field_config.watering_z_mm)).act(gantry::DispenseWater{spec.water_volume_ml}, id);
  }
  return std::move(b.unmount()).take();
}

std::vector<PrimitiveStep> compile_probe(Tool tool, gantry::Action action, Coord2 target, const CompileContext& ctx,
                                         StepBuilder b) {
  return std::move(b.mount(tool)
                       .move(raised(target))
                       .move(at_depth(target, ctx.field_config.soil_z_mm))
                       .act(std::move(action))
                       .move(raised(target))
                       .unmount())
      .take();
}

std::vector<PrimitiveStep> compile_scan(const Scan& scan, const CompileContext& ctx, StepBuilder b) {
  Coord2 origin{0, 0};
  int width = ctx.field.width_mm;
  int depth = ctx.field.depth_mm;
  if (scan.plot) {
    const auto& plot = ctx.field.plot(*scan.plot);
    origin = plot.origin;
    width = depth = plot.size_mm;
  }
  for (const Coord2 p : boustrophedon(origin, width, depth, ctx.config.scan_grid_mm))
    b.move(raised(p)).act(gantry::CaptureImage{});
  return std::move(b).take();
}

}  // namespace

std::vector<PlantId> nearest_neighbor_order(Coord2 start, std::vector<std::pair<PlantId, Coord2>> targets) {
  std::vector<PlantId> order;
  order.reserve(targets.size());
  Coord2 here = start;
  while (!targets.empty()) {
    auto best = targets.begin();
    for (auto it = targets.begin(); it != targets.end(); ++it) {
      const auto d = squared_distance(here, it->second);
      const auto bd = squared_distance(here, best->second);
      if (d < bd || (d == bd && it->first < best->first)) best = it;
    }
    order.push_back(best->first);
    here = best->second;
    targets.erase(best);
  }
  return order;
}

std::vector<Coord2> boustrophedon(Coord2 origin, int width_mm, int depth_mm, int grid_mm) {
  if (grid_mm <= 0) throw Error(ErrorCode::kInvalidArgument, "scan grid must be positive");
  const int cols = std::max(1, (width_mm + grid_mm - 1) / grid_mm);
  const int rows = std::max(1, (depth_mm + grid_mm - 1) / grid_mm);
  auto center = [&](int k, int extent) { return std::min(k * grid_mm + grid_mm / 2, extent); };
  std::vector<Coord2> out;
  out.reserve(static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    for (int i = 0; i < cols; ++i) {
      const int c = (r % 2 == 0) ? i : cols - 1 - i;
      out.push_back({origin.x_mm + center(c, width_mm), origin.y_mm + center(r, depth_mm)});
    }
  }
  return out;
}

std::vector<PrimitiveStep> compile(const TaskRequest& task, const CompileContext& ctx,
                                   const gantry::GantryState& gantry) {
  StepBuilder b(gantry);
  return std::visit(
      Overloaded{
          [&](const Sow& s) { return compile_sow(s, ctx, std::move(b)); },
          [&](const Water& w) { return compile_water(w, ctx, std::move(b)); },
          [&](const Weed& w) {
            return compile_probe(Tool::weeder, gantry::RotarySpin{ctx.config.rotary_spin_s}, w.target, ctx, std::move(b));
          },
          [&](const Scan& s) { return compile_scan(s, ctx, std::move(b)); },
          [&](const MoistureRead& m) {
            return compile_probe(Tool::moisture_probe, gantry::ReadMoisture{}, m.target, ctx, std::move(b));
          },
      },
      task.kind);
}

namespace {

[[noreturn]] void malformed(std::size_t index, const std::string& why) {
  throw Error(ErrorCode::kMalformedSequence, fmt::format("step {}: {}", index, why), {{"step_index", index}});
}

}  // namespace

void check_well_formed(std::span<const PrimitiveStep> steps, Tool initial_tool) {
  Tool mounted = initial_tool;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    std::visit(Overloaded{
                   [](const MoveTo&) {},
                   [&](const Mount& m) {
                     if (m.tool == Tool::none) malformed(i, "mount of 'none'");
                     if (mounted != Tool::none) malformed(i, "mount while a tool is mounted");
                     mounted = m.tool;
                   },
                   [&](const Unmount&) {
                     if (mounted == Tool::none) malformed(i, "unmount with no tool");
                     mounted = Tool::none;
                   },
                   [&](const Actuate& a) {
                     const Tool need = gantry::required_tool(a.action);
                     if (need != Tool::none && need != mounted)
                       malformed(i, fmt::format("{} without {}", gantry::action_name(a.action), gantry::to_string(need)));
                   },
                   [&](const Wait& w) {
                     if (!(w.seconds >= 0.0)) malformed(i, "negative wait");
                   },
               },
               steps[i]);
  }
  if (mounted != Tool::none) malformed(steps.size(), "sequence ends with a tool mounted");
}

double estimate_duration(std::span<const PrimitiveStep> steps, const gantry::FieldConfig& cfg, Coord3 start,
                         Tool initial_tool) {
  check_well_formed(steps, initial_tool);
  double total = 0.0;
  Coord3 pos = start;
  Tool mounted = initial_tool;
  auto travel = [&](std::size_t i, Coord3 to) {
    try {
      total += gantry::plan_move(pos, to, cfg.axis_speed, cfg).duration_s;
    } catch (const Error& e) {
      malformed(i, e.what());
    }
    pos = to;
  };
  auto tool_change = [&](std::size_t i, Tool tool) {
    const auto it = cfg.tool_bay_slots.find(tool);
    if (it == cfg.tool_bay_slots.end()) malformed(i, "tool without bay slot");
    const Coord3 above{it->second.x_mm, it->second.y_mm, 0};
    travel(i, above);
    travel(i, it->second);
    total += cfg.timings.engage_s;
    travel(i, above);
  };
  for (std::size_t i = 0; i < steps.size(); ++i) {
    std::visit(Overloaded{
                   [&](const MoveTo& m) { travel(i, m.target); },
                   [&](const Mount& m) {
                     tool_change(i, m.tool);
                     mounted = m.tool;
                   },
                   [&](const Unmount&) {
                     tool_change(i, mounted);
                     mounted = Tool::none;
                   },
                   [&](const Actuate& a) {
                     total += std::visit(Overloaded{
                                             [&](const gantry::DispenseWater& d) { return d.volume_ml * cfg.timings.dispense_s_per_ml; },
                                             [&](const gantry::VacuumPick&) { return cfg.timings.vacuum_pick_s; },
                                             [&](const gantry::VacuumRelease&) { return cfg.timings.vacuum_release_s; },
                                             [&](const gantry::RotarySpin& r) { return r.duration_s; },
                                             [&](const gantry::CaptureImage&) { return cfg.timings.capture_image_s; },
                                             [&](const gantry::ReadMoisture&) { return cfg.timings.read_moisture_s; },
                                         },
                                         a.action);
                   },
                   [&](const Wait& w) { total += w.seconds; },
               },
               steps[i]);
  }
  return total;
}

double estimate_duration(std::span<const PrimitiveStep> steps, const gantry::FieldConfig& config) {
  return estimate_duration(steps, config, config.home_position);
}

std::vector<StepRecord> replay(std::span<const PrimitiveStep> steps, gantry::Simulator& sim, gantry::SoilGrid& soil,
                               const StepObserver& observer) {
  std::vector<StepRecord> records;
  records.reserve(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    StepRecord rec{i, steps[i], {}, std::nullopt};
    try {
      std::visit(Overloaded{
                     [&](const MoveTo& m) { sim.move_to(m.target); },
                     [&](const Mount& m) { sim.mount_tool(m.tool); },
                     [&](const Unmount&) { sim.unmount_tool(); },
                     [&](const Actuate& a) { rec.result = sim.actuate(a.action, soil); },
                     [&](const Wait& w) { sim.wait(w.seconds); },
                 },
                 steps[i]);
    } catch (const Error& e) {
      auto details = e.details();
      details["step_index"] = i;
      details["step"] = describe(steps[i]);
      throw Error(e.code(), fmt::format("step {} ({}): {}", i, describe(steps[i]), e.what()), std::move(details));
    }
    rec.after = sim.state();
    if (observer) observer(rec);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace plotbot::tasks

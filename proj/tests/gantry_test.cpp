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

#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "plotbot/error.hpp"
#include "plotbot/gantry/simulator.hpp"

using namespace plotbot;
using namespace plotbot::gantry;

namespace {

FieldConfig cfg() { return FieldConfig::defaults(); }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("plan_move durations") {
  const auto c = cfg();
  CHECK(plan_move({0, 0, 0}, {0, 0, 0}, c.axis_speed, c).duration_s == 0.0);
  CHECK(plan_move({0, 0, 0}, {1000, 0, 0}, c.axis_speed, c).duration_s == doctest::Approx(12.5).epsilon(1e-12));
  CHECK(plan_move({0, 0, 0}, {800, 600, 0}, c.axis_speed, c).duration_s == doctest::Approx(10.0).epsilon(1e-12));
  // z at 50 mm/s dominates a short horizontal hop
  CHECK(plan_move({0, 0, 0}, {100, 0, 400}, c.axis_speed, c).duration_s == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("plan_move rejects out of bounds endpoints") {
  const auto c = cfg();
  CHECK(code_of([&] { plan_move({0, 0, 0}, {6001, 0, 0}, c.axis_speed, c); }) == ErrorCode::kOutOfBounds);
  CHECK(code_of([&] { plan_move({0, -1, 0}, {0, 0, 0}, c.axis_speed, c); }) == ErrorCode::kOutOfBounds);
  CHECK(code_of([&] { plan_move({0, 0, 0}, {0, 0, 501}, c.axis_speed, c); }) == ErrorCode::kOutOfBounds);
}

TEST_CASE("position_at interpolates per axis and ends at the target") {
  const auto c = cfg();
  const auto p = plan_move({0, 0, 0}, {800, 400, 0}, c.axis_speed, c);
  CHECK(p.position_at(0, c.axis_speed) == Coord3{0, 0, 0});
  CHECK(p.position_at(5, c.axis_speed) == Coord3{400, 400, 0});  // y already done
  CHECK(p.position_at(p.duration_s, c.axis_speed) == Coord3{800, 400, 0});
  CHECK(p.position_at(p.duration_s + 3, c.axis_speed) == Coord3{800, 400, 0});
}

TEST_CASE("mount and unmount state machine") {
  Simulator sim(cfg());
  sim.mount_tool(Tool::watering_nozzle);
  CHECK(sim.state().mounted_tool == Tool::watering_nozzle);
  const auto slot = sim.config().tool_bay_slots.at(Tool::watering_nozzle);
  CHECK(sim.state().position == Coord3{slot.x_mm, slot.y_mm, 0});
  CHECK_FALSE(sim.in_bay(Tool::watering_nozzle));
  CHECK(code_of([&] { sim.mount_tool(Tool::seeder); }) == ErrorCode::kToolAlreadyMounted);
  sim.unmount_tool();
  CHECK(sim.in_bay(Tool::watering_nozzle));
  CHECK(code_of([&] { sim.unmount_tool(); }) == ErrorCode::kNoToolMounted);
  CHECK(code_of([&] { sim.mount_tool(Tool::none); }) == ErrorCode::kUnknownTool);
}

TEST_CASE("second mount of the same tool without unmount fails") {
  Simulator sim(cfg());
  sim.mount_tool(Tool::watering_nozzle);
  const auto before = sim.state();
  CHECK(code_of([&] { sim.mount_tool(Tool::watering_nozzle); }) == ErrorCode::kToolNotInBay);
  CHECK(sim.state() == before);
}

TEST_CASE("mount A, unmount, mount B for every pair") {
  for (const auto a : kAllTools) {
    for (const auto b : kAllTools) {
      Simulator sim(cfg());
      sim.mount_tool(a);
      sim.unmount_tool();
      CHECK_NOTHROW(sim.mount_tool(b));
      CHECK(sim.state().mounted_tool == b);
    }
  }
}

TEST_CASE("dispense raises moisture by volume times absorption") {
  Simulator sim(cfg());
  const auto& c = sim.config();
  SoilGrid soil(c.width_mm, c.depth_mm, c.moisture.cell_mm, 0.30);
  sim.mount_tool(Tool::watering_nozzle);
  sim.move_to({1050, 1050, c.watering_z_mm});
  const auto r = sim.actuate(DispenseWater{100}, soil);
  CHECK(soil.at(Coord2{1050, 1050}) == doctest::Approx(0.50).epsilon(1e-12));
  CHECK_FALSE(r.watered_cells.empty());
  CHECK(r.duration_s == doctest::Approx(5.0));
  sim.unmount_tool();
  sim.mount_tool(Tool::moisture_probe);
  sim.move_to({1050, 1050, c.soil_z_mm});
  CHECK(*sim.actuate(ReadMoisture{}, soil).moisture == doctest::Approx(0.50).epsilon(1e-12));
}

TEST_CASE("actuation tool and seed preconditions") {
  Simulator sim(cfg());
  const auto& c = sim.config();
  SoilGrid soil(c.width_mm, c.depth_mm, c.moisture.cell_mm, 0.4);
  sim.mount_tool(Tool::seeder);
  CHECK(code_of([&] { sim.actuate(RotarySpin{5}, soil); }) == ErrorCode::kWrongToolMounted);
  CHECK(code_of([&] { sim.actuate(VacuumRelease{}, soil); }) == ErrorCode::kNoSeedHeld);
  CHECK(code_of([&] { sim.actuate(VacuumPick{"radish"}, soil); }) == ErrorCode::kNotAtSeedContainer);
  sim.move_to(c.seed_containers.at("radish"));
  sim.actuate(VacuumPick{"radish"}, soil);
  CHECK(code_of([&] { sim.actuate(VacuumPick{"radish"}, soil); }) == ErrorCode::kSeedAlreadyHeld);
  sim.move_to({300, 300, c.soil_z_mm});
  CHECK(*sim.actuate(VacuumRelease{}, soil).released_seed == "radish");
  // the borescope needs no tool
  CHECK(sim.actuate(CaptureImage{}, soil).image->moisture.size() == 9);
}

TEST_CASE("recover parks the head and returns the tool") {
  Simulator sim(cfg());
  sim.mount_tool(Tool::weeder);
  sim.move_to({2000, 2000, 300});
  const auto clock = sim.state().sim_clock;
  sim.recover();
  CHECK(sim.state().mounted_tool == Tool::none);
  CHECK(sim.state().position == sim.config().home_position);
  CHECK(sim.tool_bay().size() == 5);
  CHECK(sim.state().sim_clock == clock);
}

TEST_CASE("daily decay never raises and dispense never lowers moisture") {
  testgen::Rng rng(11);
  SoilGrid g(600, 300, 100, 0.0);
  for (int i = 0; i < 200; ++i) {
    const auto before = std::vector<double>(g.values().begin(), g.values().end());
    if (rng.coin()) {
      g.add_within({rng.range(0, 600), rng.range(0, 300)}, rng.range(0, 300), rng.unit() * 0.5);
      for (std::size_t k = 0; k < before.size(); ++k) CHECK(g.values()[k] >= before[k]);
    } else {
      g.scale_and_add(rng.unit(), 0.0);
      for (std::size_t k = 0; k < before.size(); ++k) CHECK(g.values()[k] <= before[k]);
    }
    for (const double v : g.values()) CHECK((v >= 0.0 && v <= 1.0));
  }
}

// Random primitive sequences. Errors are allowed; invariants must hold
// after every step whether or not it threw.
TEST_CASE("property: bounds, tool exclusivity, triangle inequality, determinism") {
  const auto c = cfg();
  const std::vector<Tool> tools(std::begin(kAllTools), std::end(kAllTools));
  const std::vector<std::string> species{"radish", "lettuce", "cumin"};

  auto run = [&](std::uint64_t seed) {
    testgen::Rng rng(seed);
    Simulator sim(c);
    SoilGrid soil(c.width_mm, c.depth_mm, c.moisture.cell_mm, c.moisture.initial);
    for (int step = 0; step < 60; ++step) {
      try {
        switch (rng.range(0, 6)) {
          case 0:
            sim.move_to(rng.coord3(c.width_mm + 50, c.depth_mm, c.z_max_mm));
            break;
          case 1:
            sim.mount_tool(rng.pick(tools));
            break;
          case 2:
            sim.unmount_tool();
            break;
          case 3:
            sim.actuate(DispenseWater{static_cast<double>(rng.range(1, 200))}, soil);
            break;
          case 4:
            if (rng.coin()) sim.move_to(c.seed_containers.at(rng.pick(species)));
            sim.actuate(VacuumPick{rng.pick(species)}, soil);
            break;
          case 5:
            sim.actuate(rng.coin() ? Action{VacuumRelease{}} : Action{ReadMoisture{}}, soil);
            break;
          default:
            sim.actuate(CaptureImage{}, soil);
        }
      } catch (const Error&) {
      }
      const auto& s = sim.state();
      REQUIRE(c.in_bounds(s.position));
      REQUIRE_FALSE(s.busy);
      const std::size_t mounted = s.mounted_tool == Tool::none ? 0 : 1;
      REQUIRE(sim.tool_bay().size() + mounted == 5);
      if (mounted) REQUIRE_FALSE(sim.in_bay(s.mounted_tool));
    }
    return std::pair{sim.state(), soil};
  };

  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    const auto a = run(seed);
    const auto b = run(seed);
    REQUIRE(a.first == b.first);
    REQUIRE(a.second == b.second);
  }

  testgen::Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    const auto a = rng.coord3(c.width_mm, c.depth_mm, c.z_max_mm);
    const auto b = rng.coord3(c.width_mm, c.depth_mm, c.z_max_mm);
    const auto d = rng.coord3(c.width_mm, c.depth_mm, c.z_max_mm);
    const double ac = plan_move(a, d, c.axis_speed, c).duration_s;
    const double ab = plan_move(a, b, c.axis_speed, c).duration_s;
    const double bc = plan_move(b, d, c.axis_speed, c).duration_s;
    REQUIRE(ac <= ab + bc + 1e-9);
  }
}

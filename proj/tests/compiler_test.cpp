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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gen.hpp"
#include "plotbot/error.hpp"
#include "plotbot/tasks/compiler.hpp"

using namespace plotbot;
using namespace plotbot::tasks;
using gantry::Tool;

namespace {

struct World {
  gantry::FieldConfig config = gantry::FieldConfig::defaults();
  policy::SpeciesCatalog species = policy::SpeciesCatalog::defaults();
  field::FieldState field{config};

  CompileContext ctx() const { return {config, species, field, {}}; }
  field::PlantId plant(Coord2 at, const std::string& sp = "radish") {
    field::Plant p;
    p.plot_id = field.plot_at(at).value_or(0);
    p.owner = "u";
    p.species_id = sp;
    p.position = at;
    return field.add_plant(p);
  }
  std::vector<PrimitiveStep> compile(TaskKind kind) const {
    TaskRequest t;
    t.id = 1;
    t.user_id = "u";
    t.kind = std::move(kind);
    return tasks::compile(t, ctx(), gantry::GantryState{});
  }
};

template <typename T>
int count(const std::vector<PrimitiveStep>& steps) {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(), [](const auto& s) { return std::holds_alternative<T>(s); }));
}

int count_action(const std::vector<PrimitiveStep>& steps, auto pred) {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(), [&](const auto& s) {
    const auto* a = std::get_if<Actuate>(&s);
    return a && pred(a->action);
  }));
}

bool is_dispense(const gantry::Action& a) { return std::holds_alternative<gantry::DispenseWater>(a); }
bool is_capture(const gantry::Action& a) { return std::holds_alternative<gantry::CaptureImage>(a); }

}  // namespace

TEST_CASE("water one target: one mount, one unmount, one dispense") {
  World w;
  const auto id = w.plant({300, 300});
  const auto steps = w.compile(Water{{id}, {}});
  CHECK(count<Mount>(steps) == 1);
  CHECK(count<Unmount>(steps) == 1);
  CHECK(count_action(steps, is_dispense) == 1);
  CHECK(std::get<Mount>(steps.front()).tool == Tool::watering_nozzle);
  CHECK(std::holds_alternative<Unmount>(steps.back()));
}

TEST_CASE("sow template") {
  World w;
  const auto steps = w.compile(Sow{"lettuce", Coord2{500, 500}});
  REQUIRE(steps.size() == 10);
  CHECK(std::get<Mount>(steps[0]).tool == Tool::seeder);
  CHECK(std::get<MoveTo>(steps[2]).target == w.config.seed_containers.at("lettuce"));
  CHECK(std::holds_alternative<gantry::VacuumPick>(std::get<Actuate>(steps[3]).action));
  CHECK(std::get<MoveTo>(steps[6]).target == Coord3{500, 500, w.config.soil_z_mm + 10});
  CHECK(std::holds_alternative<gantry::VacuumRelease>(std::get<Actuate>(steps[7]).action));
  CHECK(std::holds_alternative<Unmount>(steps[9]));
  CHECK_THROWS_AS(w.compile(Sow{"kale", Coord2{1, 1}}), Error);
}

TEST_CASE("weed and moisture templates") {
  World w;
  auto steps = w.compile(Weed{{700, 700}});
  CHECK(std::get<Mount>(steps.front()).tool == Tool::weeder);
  CHECK(count_action(steps, [](const auto& a) { return std::holds_alternative<gantry::RotarySpin>(a); }) == 1);
  steps = w.compile(MoistureRead{{700, 700}});
  CHECK(std::get<Mount>(steps.front()).tool == Tool::moisture_probe);
  CHECK(count<Unmount>(steps) == 1);
}

TEST_CASE("whole field scan: 20 x 10 captures in serpentine order") {
  World w;
  const auto steps = w.compile(Scan{});
  CHECK(count<Mount>(steps) == 0);
  CHECK(count_action(steps, is_capture) == 200);
  std::vector<Coord3> moves;
  for (const auto& s : steps)
    if (const auto* m = std::get_if<MoveTo>(&s)) moves.push_back(m->target);
  REQUIRE(moves.size() == 200);
  for (int r = 0; r < 10; ++r) {
    for (int c = 0; c < 20; ++c) {
      const int col = r % 2 == 0 ? c : 19 - c;
      CHECK(moves[static_cast<std::size_t>(r * 20 + c)] == Coord3{150 + 300 * col, 150 + 300 * r, 0});
    }
  }
}

TEST_CASE("empty water list and removed plants") {
  World w;
  CHECK_THROWS_AS(w.compile(Water{}), Error);
  const auto id = w.plant({300, 300});
  w.field.plants.at(id).state = field::PlantState::removed;
  try {
    w.compile(Water{{id}, {}});
    FAIL("expected UnknownPlant");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownPlant);
  }
}

// Oracle: among all permutations of the targets, exactly one is greedy
// (each hop goes to the closest remaining target, ties to the lower id)
// and it is the one the compiler emitted.
TEST_CASE("water visits targets in nearest-neighbor order from the nozzle slot") {
  testgen::Rng rng(21);
  for (int round = 0; round < 200; ++round) {
    World w;
    const int n = rng.range(1, 5);
    std::vector<std::pair<field::PlantId, Coord2>> targets;
    for (int i = 0; i < n; ++i) {
      const Coord2 p{rng.range(0, 2000), rng.range(0, 2000)};
      targets.emplace_back(w.plant(p), p);
    }
    std::vector<field::PlantId> ids;
    for (const auto& t : targets) ids.push_back(t.first);
    const auto steps = w.compile(Water{ids, {}});
    std::vector<field::PlantId> visited;
    for (const auto& s : steps)
      if (const auto* a = std::get_if<Actuate>(&s); a && a->plant) visited.push_back(*a->plant);

    const Coord2 start = w.config.tool_bay_slots.at(Tool::watering_nozzle).xy();
    std::vector<std::size_t> perm(targets.size());
    std::iota(perm.begin(), perm.end(), 0);
    int greedy = 0;
    std::vector<field::PlantId> greedy_ids;
    do {
      bool ok = true;
      Coord2 here = start;
      for (std::size_t k = 0; k < perm.size() && ok; ++k) {
        const auto& chosen = targets[perm[k]];
        for (std::size_t j = k + 1; j < perm.size(); ++j) {
          const auto& other = targets[perm[j]];
          const auto dc = squared_distance(here, chosen.second);
          const auto dother = squared_distance(here, other.second);
          if (dother < dc || (dother == dc && other.first < chosen.first)) ok = false;
        }
        here = chosen.second;
      }
      if (ok) {
        ++greedy;
        greedy_ids.clear();
        for (const auto i : perm) greedy_ids.push_back(targets[i].first);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    REQUIRE(greedy == 1);
    REQUIRE(visited == greedy_ids);
  }
}

TEST_CASE("estimate_duration") {
  const auto cfg = gantry::FieldConfig::defaults();
  CHECK(estimate_duration(std::vector<PrimitiveStep>{}, cfg) == 0.0);
  const std::vector<PrimitiveStep> one{MoveTo{{1000, 0, 0}}};
  CHECK(estimate_duration(one, cfg, {0, 0, 0}) == doctest::Approx(12.5).epsilon(1e-12));

  World w;
  const auto id = w.plant({2500, 1500});
  const auto steps = w.compile(Water{{id}, {}});
  std::vector<PrimitiveStep> moves_only;
  for (const auto& s : steps)
    if (std::holds_alternative<MoveTo>(s)) moves_only.push_back(s);
  CHECK(estimate_duration(steps, cfg) >= estimate_duration(moves_only, cfg));
}

TEST_CASE("malformed sequences") {
  const auto cfg = gantry::FieldConfig::defaults();
  auto code = [&](std::vector<PrimitiveStep> s) {
    try {
      check_well_formed(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  CHECK(code({Actuate{gantry::DispenseWater{10}, {}}}) == ErrorCode::kMalformedSequence);
  CHECK(code({Mount{Tool::seeder}, Mount{Tool::weeder}}) == ErrorCode::kMalformedSequence);
  CHECK(code({Unmount{}}) == ErrorCode::kMalformedSequence);
  CHECK(code({Mount{Tool::seeder}}) == ErrorCode::kMalformedSequence);
  CHECK(code({Mount{Tool::weeder}, Actuate{gantry::DispenseWater{10}, {}}, Unmount{}}) == ErrorCode::kMalformedSequence);
  CHECK_THROWS_AS(estimate_duration(std::vector<PrimitiveStep>{Unmount{}}, cfg), Error);
}

TEST_CASE("a carried tool is returned first") {
  World w;
  gantry::GantryState g;
  g.mounted_tool = Tool::weeder;
  TaskRequest t;
  t.user_id = "u";
  t.kind = Scan{0};
  const auto steps = compile(t, w.ctx(), g);
  CHECK(std::holds_alternative<Unmount>(steps.front()));
  CHECK_NOTHROW(check_well_formed(steps, Tool::weeder));
}

// Random valid tasks: every compiled sequence is well formed, compiling is
// pure, and the replay ends with no tool and, for sows, the seed released
// at the target.
TEST_CASE("property: compiled sequences are well formed and replay cleanly") {
  testgen::Rng rng(77);
  const std::vector<std::string> species{"radish", "lettuce", "marigold", "cornflower", "cumin"};
  for (int round = 0; round < 300; ++round) {
    World w;
    const int plot = rng.range(0, 17);
    const auto& pl = w.field.plot(plot);
    std::vector<field::PlantId> plants;
    for (int i = rng.range(1, 6); i > 0; --i) plants.push_back(w.plant(rng.coord2(pl.origin.x_mm, pl.origin.y_mm, pl.size_mm)));
    TaskKind kind;
    Coord2 sow_target{};
    switch (rng.range(0, 4)) {
      case 0:
        sow_target = rng.coord2(pl.origin.x_mm, pl.origin.y_mm, pl.size_mm);
        kind = Sow{rng.pick(species), sow_target};
        break;
      case 1:
        kind = Water{plants, plot};
        break;
      case 2:
        kind = Weed{rng.coord2(pl.origin.x_mm, pl.origin.y_mm, pl.size_mm)};
        break;
      case 3:
        kind = rng.coin() ? Scan{plot} : Scan{};
        break;
      default:
        kind = MoistureRead{rng.coord2(pl.origin.x_mm, pl.origin.y_mm, pl.size_mm)};
    }
    const auto steps = w.compile(kind);
    REQUIRE_NOTHROW(check_well_formed(steps));
    REQUIRE(steps == w.compile(kind));

    gantry::Simulator sim(w.config);
    auto soil = w.field.soil;
    const auto records = replay(steps, sim, soil);
    REQUIRE(records.size() == steps.size());
    REQUIRE(sim.state().mounted_tool == Tool::none);
    REQUIRE(sim.tool_bay().size() == 5);
    const double est = estimate_duration(steps, w.config);
    // the clock ticks in microseconds
    REQUIRE(std::abs(to_seconds(sim.state().sim_clock - Timestamp{}) - est) <= 1e-6 * static_cast<double>(steps.size()));
    if (std::holds_alternative<Sow>(kind)) {
      int released = 0;
      for (const auto& r : records)
        if (r.result && r.result->released_seed) {
          ++released;
          REQUIRE(r.result->at.xy() == sow_target);
        }
      REQUIRE(released == 1);
    }
  }
}

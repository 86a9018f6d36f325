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

#include "plotbot/error.hpp"
#include "plotbot/garden/garden.hpp"

using namespace plotbot;
using garden::Garden;
using garden::GardenConfig;
using policy::ControlMode;

namespace {

std::unique_ptr<Garden> make(GardenConfig cfg = {}) {
  return std::make_unique<Garden>(std::move(cfg), std::make_unique<field::EventLog>());
}

void add_users(Garden& g) {
  g.register_user("ana", "Ana", 0, "", ControlMode::manual);
  g.register_user("bo", "Bo", 1, "", ControlMode::hybrid);
  g.register_user("cy", "Cy", 7, "", ControlMode::automated);
}

garden::GardenState restored(const Garden& g) {
  const auto contents = field::parse_log(g.log()->bytes());
  REQUIRE(contents.intact());
  return Garden::restore(contents)->snapshot();
}

struct Recorder : garden::EventSink {
  std::vector<garden::Delta> deltas;
  void publish(const garden::Delta& d) override { deltas.push_back(d); }
};

}  // namespace

TEST_CASE("sow executes and leaves a plant at the target") {
  auto g = make();
  add_users(*g);
  g->open_day(1, {});
  const auto r = g->submit("ana", tasks::Sow{"radish", Coord2{300, 300}});
  CHECK(r.position == 1);
  CHECK(r.estimate_s > 0);
  const auto done = g->run_next();
  CHECK(done.state == sched::EntryState::done);
  const auto s = g->snapshot();
  REQUIRE(s.field.plants.size() == 1);
  const auto& p = s.field.plants.begin()->second;
  CHECK(p.position == Coord2{300, 300});
  CHECK(p.plot_id == 0);
  CHECK(p.owner == "ana");
  CHECK(p.sown_day == 1);
  CHECK(s.field.reservations.empty());
  CHECK(s.timeline.events().back().kind == field::EventKind::sow);
  CHECK(s.timeline.events().back().status == "done");
}

TEST_CASE("cross-plot sow is rejected and counted") {
  auto g = make();
  add_users(*g);
  try {
    g->submit("ana", tasks::Sow{"radish", Coord2{1500, 300}});
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCrossPlotTarget);
  }
  const auto s = g->snapshot();
  CHECK(s.queue.pending_count() == 0);
  CHECK_FALSE(s.rejections.empty());
  CHECK(restored(*g) == s);
}

TEST_CASE("automated users cannot submit care tasks") {
  auto g = make();
  add_users(*g);
  CHECK_THROWS_AS(g->submit("cy", tasks::Water{{}, 7}), Error);
  CHECK_NOTHROW(g->submit("cy", tasks::Sow{"lettuce", std::nullopt}));
}

TEST_CASE("auto placement resolves to a point in the user's plot") {
  auto g = make();
  add_users(*g);
  const auto r = g->submit("bo", tasks::Sow{"lettuce", std::nullopt});
  const auto& sow = std::get<tasks::Sow>(r.task.kind);
  REQUIRE(sow.target);
  CHECK(g->snapshot().field.plot(1).contains(*sow.target));
}

TEST_CASE("water all is debounced per user and plot") {
  auto g = make();
  add_users(*g);
  g->submit("ana", tasks::Sow{"radish", Coord2{300, 300}});
  g->run_next();
  g->submit("ana", tasks::Water{{}, 0});
  CHECK_THROWS_AS(g->submit("ana", tasks::Water{{}, 0}), Error);
  g->advance_clock(g->clock().now() + std::chrono::seconds(61));
  CHECK_NOTHROW(g->submit("ana", tasks::Water{{}, 0}));
}

TEST_CASE("restore from the log reproduces the state") {
  auto g = make();
  add_users(*g);
  for (int day = 1; day <= 3; ++day) {
    g->open_day(day, {day == 2, day == 2 ? 5.0 : 0.0, 18.0});
    g->run_planner(day, {g->config().day_start(day), day == 2, 0.0, 18.0});
    g->record_login("ana");
    if (day == 1) {
      g->submit("ana", tasks::Sow{"radish", Coord2{200, 200}});
      g->submit("bo", tasks::Sow{"lettuce", std::nullopt});
      g->submit("cy", tasks::Sow{"cumin", std::nullopt});
    }
    if (day > 1) g->submit("ana", tasks::Water{{}, 0});
    g->add_weed(7, {1200, 1300});
    g->run_until(g->config().day_start(day + 1));
    g->post_chat("bo", "hello");
    g->close_day(day);
  }
  const auto s = g->snapshot();
  CHECK(s.field.plants.size() == 3);
  CHECK(s.frames.size() == 3);
  CHECK(restored(*g) == s);
}

TEST_CASE("interrupted execution restores to the same state as an explicit interrupt") {
  const auto script = [](Garden& g, bool inject) {
    add_users(g);
    g.open_day(1, {});
    g.submit("ana", tasks::Sow{"radish", Coord2{300, 300}});
    const auto id = g.submit("ana", tasks::Sow{"radish", Coord2{600, 300}}).task.id;
    g.run_next();
    if (inject) g.inject_interrupt(id);
  };

  // Crash: the log ends right after execution_started for the second sow.
  auto crashed = make();
  script(*crashed, false);
  auto bytes = crashed->log()->bytes();
  crashed->run_next();
  // Drop the trailing finish record.
  const auto boundaries = crashed->log()->boundaries();
  bytes = crashed->log()->bytes().substr(0, boundaries[boundaries.size() - 2]);
  const auto after_crash = Garden::restore(field::parse_log(bytes))->snapshot();

  auto reference = make();
  script(*reference, true);
  reference->run_next();
  const auto expected = reference->snapshot();

  CHECK(after_crash == expected);
  const auto& e = expected.queue.entries().rbegin()->second;
  CHECK(e.state == sched::EntryState::failed);
  CHECK(*e.result.error == ErrorCode::kExecutionInterrupted);
  CHECK(expected.field.plants.size() == 1);
  CHECK(expected.field.reservations.empty());
  CHECK(expected.gantry.mounted_tool == gantry::Tool::none);
}

TEST_CASE("checkpoint restore equals full fold") {
  GardenConfig cfg;
  cfg.checkpoint_every = 3;
  auto g = make(cfg);
  add_users(*g);
  g->open_day(1, {});
  for (int i = 0; i < 4; ++i) g->submit("ana", tasks::Sow{"radish", Coord2{150 + 200 * i, 150}});
  g->run_until(g->config().day_start(2));
  g->close_day(1);
  g->open_day(2, {true, 3.0, 15.0});
  g->submit("bo", tasks::Sow{"marigold", std::nullopt});
  g->run_next();
  CHECK(restored(*g) == g->snapshot());
}

TEST_CASE("sink receives ordered deltas for an execution") {
  auto g = make();
  Recorder rec;
  g->attach_sink(&rec);
  add_users(*g);
  g->submit("ana", tasks::Sow{"radish", Coord2{900, 900}});
  g->run_next();
  int gantry = 0;
  bool plant = false;
  for (const auto& d : rec.deltas) {
    if (d.type == "gantry") ++gantry;
    if (d.type == "plant") plant = true;
  }
  CHECK(gantry > 5);
  CHECK(plant);
  for (std::size_t i = 1; i < rec.deltas.size(); ++i) CHECK(rec.deltas[i - 1].at <= rec.deltas[i].at);
}

TEST_CASE("failed execution recovers the robot") {
  GardenConfig cfg;
  auto narrow = cfg.field;
  narrow.width_mm = 2000;
  narrow.plot_cols = 2;
  cfg.simulator_field_override = narrow;
  auto g = make(cfg);
  g->register_user("dee", "Dee", 5, "", ControlMode::automated);
  g->submit("dee", tasks::Sow{"lettuce", std::nullopt});  // plot 5 lies beyond x = 2000
  const auto e = g->run_next();
  CHECK(e.state == sched::EntryState::failed);
  CHECK(*e.result.error == ErrorCode::kOutOfBounds);
  const auto s = g->snapshot();
  CHECK_FALSE(s.gantry.busy);
  CHECK(s.gantry.mounted_tool == gantry::Tool::none);
  CHECK(s.field.plants.empty());
  CHECK(restored(*g) == s);
}

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

// Random mixed traffic against a Garden, shared by the stream tests and the
// acceptance binary.

#include <string>
#include <vector>

#include "gen.hpp"
#include "plotbot/error.hpp"
#include "plotbot/garden/garden.hpp"

namespace testgen {

struct Workload {
  plotbot::garden::Garden& g;
  Rng rng;
  int day = 0;
  std::vector<std::string> users{"u0", "u1", "u2", "u3"};
  int errors = 0;

  Workload(plotbot::garden::Garden& garden, std::uint64_t seed) : g(garden), rng(seed) {
    using plotbot::policy::ControlMode;
    const ControlMode modes[] = {ControlMode::manual, ControlMode::hybrid, ControlMode::automated, ControlMode::hybrid};
    for (int i = 0; i < 4; ++i) g.register_user(users[i], users[i], i * 3, "", modes[i]);
  }

  plotbot::Coord2 point_in(int plot) {
    const auto p = g.read([&](const auto& s) { return s.field.plot(plot); });
    return rng.coord2(p.origin.x_mm, p.origin.y_mm, p.size_mm);
  }

  void next_day() {
    if (day > 0) {
      g.run_until(g.config().day_start(day + 1));
      g.advance_clock(g.config().day_start(day + 1));
      g.close_day(day);
    }
    ++day;
    const bool rain = rng.coin(0.3);
    g.open_day(day, {rain, rain ? 4.0 : 0.0, 17.0});
  }

  // One random command; Errors are expected and counted.
  void step() {
    namespace t = plotbot::tasks;
    const auto i = static_cast<std::size_t>(rng.range(0, 3));
    const auto& u = users[i];
    const int plot = static_cast<int>(i) * 3;
    try {
      switch (rng.range(0, 11)) {
        case 0:
        case 1:
          g.submit(u, t::Sow{rng.pick(std::vector<std::string>{"radish", "lettuce", "marigold"}),
                             rng.coin(0.5) ? std::optional(point_in(plot)) : std::nullopt});
          break;
        case 2:
          g.submit(u, t::Water{{}, plot});
          break;
        case 3:
          g.submit(u, t::Weed{point_in(plot)});
          break;
        case 4:
          g.submit(u, t::MoistureRead{point_in(plot)});
          break;
        case 5:
          g.submit(u, t::Scan{plot});
          break;
        case 6:
          g.post_chat(u, "m" + std::to_string(rng.next() % 1000));
          break;
        case 7:
          g.add_weed(plot, point_in(plot));
          break;
        case 8:
          g.switch_mode(u, static_cast<plotbot::policy::ControlMode>(rng.range(0, 2)));
          break;
        case 9: {
          const auto ids = g.read([&](const auto& s) {
            std::vector<plotbot::field::PlantId> out;
            for (const auto& [id, p] : s.field.plants)
              if (p.owner == u && p.live()) out.push_back(id);
            return out;
          });
          if (!ids.empty()) g.remove_plant(u, rng.pick(ids));
          break;
        }
        case 10:
          g.record_login(u);
          break;
        default:
          g.run_until(g.clock().now() + std::chrono::seconds(rng.range(10, 900)));
          g.advance_clock(g.clock().now() + std::chrono::seconds(rng.range(0, 300)));
      }
    } catch (const plotbot::Error&) {
      ++errors;
    }
  }

  // Lets the robot finish everything it has started.
  void settle() { g.run_until(g.clock().now() + std::chrono::seconds(1)); }
};

}  // namespace testgen

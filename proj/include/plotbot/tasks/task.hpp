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

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/field/field_state.hpp"
#include "plotbot/gantry/simulator.hpp"
#include "plotbot/time.hpp"

namespace plotbot::tasks {

using field::PlantId;
using field::TaskId;

struct Sow {
  std::string species;
  std::optional<Coord2> target;  // nullopt: placement delegated to the robot
  bool operator==(const Sow&) const = default;
};

// Either an explicit plant list or "Water All" for a plot. A Water All is
// expanded to the owner's live plants at submission; `water_all_plot`
// records where it came from so the debounce rule can recognize repeats.
struct Water {
  std::vector<PlantId> plants;
  std::optional<int> water_all_plot;
  bool operator==(const Water&) const = default;
};

struct Weed {
  Coord2 target;
  bool operator==(const Weed&) const = default;
};

struct Scan {
  std::optional<int> plot;  // nullopt: whole field
  bool operator==(const Scan&) const = default;
};

struct MoistureRead {
  Coord2 target;
  bool operator==(const MoistureRead&) const = default;
};

using TaskKind = std::variant<Sow, Water, Weed, Scan, MoistureRead>;

enum class Origin { user, auto_planner };

// The planner's shared whole-field scan is issued under this actor.
inline constexpr std::string_view kRobotActor = "robot";

struct TaskRequest {
  TaskId id = 0;
  std::string user_id;
  TaskKind kind;
  Timestamp submitted_at{};
  Origin origin = Origin::user;

  bool operator==(const TaskRequest&) const = default;
};

std::string kind_name(const TaskKind& kind);
std::string_view to_string(Origin o) noexcept;

struct MoveTo {
  Coord3 target;
  bool operator==(const MoveTo&) const = default;
};
struct Mount {
  gantry::Tool tool = gantry::Tool::none;
  bool operator==(const Mount&) const = default;
};
struct Unmount {
  bool operator==(const Unmount&) const = default;
};
// `plant` tags a dispense with the plant it waters; the executor stamps
// last_watered_at from it.
struct Actuate {
  gantry::Action action;
  std::optional<PlantId> plant;
  bool operator==(const Actuate&) const = default;
};
struct Wait {
  double seconds = 0.0;
  bool operator==(const Wait&) const = default;
};

using PrimitiveStep = std::variant<MoveTo, Mount, Unmount, Actuate, Wait>;

std::string describe(const PrimitiveStep& step);

void to_json(nlohmann::json& j, const TaskKind& k);
void from_json(const nlohmann::json& j, TaskKind& k);
void to_json(nlohmann::json& j, const TaskRequest& t);
void from_json(const nlohmann::json& j, TaskRequest& t);
void to_json(nlohmann::json& j, const PrimitiveStep& s);

}  // namespace plotbot::tasks

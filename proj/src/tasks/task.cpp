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

#include "plotbot/tasks/task.hpp"

#include <fmt/format.h>

#include "plotbot/error.hpp"
#include "plotbot/overloaded.hpp"

namespace plotbot::tasks {

std::string kind_name(const TaskKind& kind) {
  return std::visit(Overloaded{
                        [](const Sow&) { return std::string("sow"); },
                        [](const Water&) { return std::string("water"); },
                        [](const Weed&) { return std::string("weed"); },
                        [](const Scan&) { return std::string("scan"); },
                        [](const MoistureRead&) { return std::string("moisture_read"); },
                    },
                    kind);
}

std::string_view to_string(Origin o) noexcept { return o == Origin::user ? "user" : "auto_planner"; }

std::string describe(const PrimitiveStep& step) {
  return std::visit(
      Overloaded{
          [](const MoveTo& m) { return fmt::format("MoveTo({},{},{})", m.target.x_mm, m.target.y_mm, m.target.z_mm); },
          [](const Mount& m) { return fmt::format("Mount({})", gantry::to_string(m.tool)); },
          [](const Unmount&) { return std::string("Unmount"); },
          [](const Actuate& a) { return fmt::format("Actuate({})", gantry::action_name(a.action)); },
          [](const Wait& w) { return fmt::format("Wait({})", w.seconds); },
      },
      step);
}

void to_json(nlohmann::json& j, const TaskKind& k) {
  j = {{"kind", kind_name(k)}};
  std::visit(Overloaded{
                 [&](const Sow& s) {
                   j["species"] = s.species;
                   j["target"] = s.target ? nlohmann::json(*s.target) : nlohmann::json(nullptr);
                 },
                 [&](const Water& w) {
                   j["plants"] = w.plants;
                   j["water_all_plot"] = w.water_all_plot ? nlohmann::json(*w.water_all_plot) : nlohmann::json(nullptr);
                 },
                 [&](const Weed& w) { j["target"] = w.target; },
                 [&](const Scan& s) { j["plot"] = s.plot ? nlohmann::json(*s.plot) : nlohmann::json(nullptr); },
                 [&](const MoistureRead& m) { j["target"] = m.target; },
             },
             k);
}

namespace {

template <class T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void from_json(const nlohmann::json& j, TaskKind& k) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "sow") {
    k = Sow{j.at("species").get<std::string>(), optional_field<Coord2>(j, "target")};
  } else if (kind == "water") {
    Water w;
    if (j.contains("plants")) w.plants = j.at("plants").get<std::vector<PlantId>>();
    w.water_all_plot = optional_field<int>(j, "water_all_plot");
    k = std::move(w);
  } else if (kind == "weed") {
    k = Weed{j.at("target").get<Coord2>()};
  } else if (kind == "scan") {
    k = Scan{optional_field<int>(j, "plot")};
  } else if (kind == "moisture_read") {
    k = MoistureRead{j.at("target").get<Coord2>()};
  } else {
    throw Error(ErrorCode::kBadRequest, "unknown task kind '" + kind + "'");
  }
}

void to_json(nlohmann::json& j, const TaskRequest& t) {
  j = {{"id", t.id},
       {"user_id", t.user_id},
       {"task", t.kind},
       {"submitted_at", to_micros(t.submitted_at)},
       {"origin", to_string(t.origin)}};
}

void from_json(const nlohmann::json& j, TaskRequest& t) {
  t.id = j.at("id").get<TaskId>();
  t.user_id = j.at("user_id").get<std::string>();
  t.kind = j.at("task").get<TaskKind>();
  t.submitted_at = from_micros(j.at("submitted_at").get<std::int64_t>());
  t.origin = j.at("origin").get<std::string>() == "auto_planner" ? Origin::auto_planner : Origin::user;
}

void to_json(nlohmann::json& j, const PrimitiveStep& s) {
  std::visit(Overloaded{
                 [&](const MoveTo& m) { j = {{"step", "move_to"}, {"target", m.target}}; },
                 [&](const Mount& m) { j = {{"step", "mount"}, {"tool", gantry::to_string(m.tool)}}; },
                 [&](const Unmount&) { j = {{"step", "unmount"}}; },
                 [&](const Actuate& a) {
                   j = {{"step", "actuate"}, {"action", a.action}};
                   if (a.plant) j["plant"] = *a.plant;
                 },
                 [&](const Wait& w) { j = {{"step", "wait"}, {"seconds", w.seconds}}; },
             },
             s);
}

}  // namespace plotbot::tasks

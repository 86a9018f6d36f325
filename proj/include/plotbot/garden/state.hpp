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

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/field/field_state.hpp"
#include "plotbot/field/growth.hpp"
#include "plotbot/field/snapshot.hpp"
#include "plotbot/field/timeline.hpp"
#include "plotbot/gantry/config.hpp"
#include "plotbot/gantry/simulator.hpp"
#include "plotbot/policy/modes.hpp"
#include "plotbot/policy/species.hpp"
#include "plotbot/policy/validate.hpp"
#include "plotbot/sched/planner.hpp"
#include "plotbot/sched/task_queue.hpp"
#include "plotbot/tasks/compiler.hpp"

namespace plotbot::garden {

// Seeded soil-moisture noise: a persistent per-cell offset drawn once from
// N(0, bias_sigma) plus a fresh N(0, daily_sigma) draw per cell and day,
// both added at each day start.
struct MoistureNoise {
  double bias_sigma = 0.0;
  double daily_sigma = 0.0;
  std::uint64_t seed = 1;

  bool enabled() const { return bias_sigma > 0.0 || daily_sigma > 0.0; }
};

struct GardenConfig {
  gantry::FieldConfig field = gantry::FieldConfig::defaults();
  policy::SpeciesCatalog species = policy::SpeciesCatalog::defaults();
  policy::PolicyConfig policy;
  tasks::CompilerConfig compiler;
  sched::PlannerConfig planner;
  field::GrowthConfig growth;
  MoistureNoise noise;
  std::size_t queue_capacity = 256;
  Duration water_all_debounce = std::chrono::seconds(60);
  int weed_clear_radius_mm = 50;
  double gantry_update_interval_s = 5.0;  // sim seconds between streamed positions
  int checkpoint_every = 0;               // records; 0 = only at day end
  Timestamp epoch = Timestamp{std::chrono::sys_days{std::chrono::June / 3 / 2024}};  // start of day 1
  // Test hook: the simulator runs on this geometry while the compiler keeps
  // `field`, so tasks fail the way a miscalibrated robot would.
  std::optional<gantry::FieldConfig> simulator_field_override;

  Timestamp day_start(int day) const { return epoch + std::chrono::seconds(kSecondsPerDay * (day - 1)); }
  void validate() const;
};

struct UserRecord {
  std::string user_id;
  std::string display_name;
  int plot_id = 0;
  std::string credential_hash;

  bool operator==(const UserRecord&) const = default;
};

struct ChatMessage {
  std::int64_t id = 0;
  std::string sender;
  Timestamp timestamp{};
  std::string text;

  bool operator==(const ChatMessage&) const = default;
};

inline constexpr std::size_t kMaxChatCodePoints = 2000;
std::size_t utf8_length(std::string_view text) noexcept;

// Everything restore() must reproduce. Compared structurally in tests.
struct GardenState {
  field::FieldState field;
  gantry::GantryState gantry;
  std::set<gantry::Tool> bay;
  sched::TaskQueue queue;
  policy::ModeTable modes;
  field::Timeline timeline;
  std::vector<field::SnapshotFrame> frames;
  std::vector<ChatMessage> chat;
  std::map<std::string, UserRecord> users;
  std::map<std::string, Timestamp> water_all_last;  // "user/plot" -> last accepted Water All
  sched::PlannerDayGuard planner_days;
  std::map<std::string, std::int64_t> rejections;  // rule id or error name -> count
  tasks::TaskId next_task_id = 1;
  std::int64_t next_chat_id = 1;
  int day = 0;
  bool day_open = false;
  Timestamp now{};
  std::int64_t last_script_step = -1;

  bool operator==(const GardenState&) const = default;

  const UserRecord* user(std::string_view id) const;
  std::optional<int> plot_of(std::string_view user_id) const;
};

void to_json(nlohmann::json& j, const GardenConfig& c);
void from_json(const nlohmann::json& j, GardenConfig& c);
void to_json(nlohmann::json& j, const UserRecord& u);
void from_json(const nlohmann::json& j, UserRecord& u);
void to_json(nlohmann::json& j, const ChatMessage& m);
void from_json(const nlohmann::json& j, ChatMessage& m);
void to_json(nlohmann::json& j, const GardenState& s);
void from_json(const nlohmann::json& j, GardenState& s);

}  // namespace plotbot::garden

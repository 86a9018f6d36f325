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

#include "plotbot/garden/state.hpp"

#include <fmt/format.h>

#include "plotbot/error.hpp"

namespace plotbot::garden {

void GardenConfig::validate() const {
  field.validate();
  if (simulator_field_override) simulator_field_override->validate();
  if (species.all().empty()) throw Error(ErrorCode::kInvalidConfig, "species catalog is empty");
  for (const auto& [id, s] : species.all()) {
    if (s.spread_radius_mm <= 0 || s.germination_days < 0 || s.water_volume_ml < 0)
      throw Error(ErrorCode::kInvalidConfig, fmt::format("species {} has invalid parameters", id));
  }
  if (queue_capacity == 0) throw Error(ErrorCode::kInvalidConfig, "queue capacity must be positive");
  if (!(gantry_update_interval_s > 0)) throw Error(ErrorCode::kInvalidConfig, "gantry update interval must be positive");
  if (noise.bias_sigma < 0 || noise.daily_sigma < 0) throw Error(ErrorCode::kInvalidConfig, "noise sigma must be >= 0");
  if (planner.run_hour < 0 || planner.run_hour > 23) throw Error(ErrorCode::kInvalidConfig, "planner hour out of range");
}

std::size_t utf8_length(std::string_view text) noexcept {
  std::size_t n = 0;
  for (const char c : text)
    if ((static_cast<unsigned char>(c) & 0xC0U) != 0x80U) ++n;
  return n;
}

const UserRecord* GardenState::user(std::string_view id) const {
  const auto it = users.find(std::string(id));
  return it == users.end() ? nullptr : &it->second;
}

std::optional<int> GardenState::plot_of(std::string_view user_id) const {
  const auto* u = user(user_id);
  return u ? std::optional(u->plot_id) : std::nullopt;
}

void to_json(nlohmann::json& j, const GardenConfig& c) {
  j = {{"field", c.field},
       {"species", c.species.to_json()},
       {"policy",
        {{"overwater_threshold", c.policy.overwater_threshold},
         {"repeat_window_s", std::chrono::duration_cast<std::chrono::seconds>(c.policy.repeat_window).count()},
         {"automated_rejects_care", c.policy.automated_rejects_care}}},
       {"compiler", {{"scan_grid_mm", c.compiler.scan_grid_mm}, {"rotary_spin_s", c.compiler.rotary_spin_s}}},
       {"planner", c.planner},
       {"growth", c.growth},
       {"noise", {{"bias_sigma", c.noise.bias_sigma}, {"daily_sigma", c.noise.daily_sigma}, {"seed", c.noise.seed}}},
       {"queue_capacity", c.queue_capacity},
       {"water_all_debounce_s", std::chrono::duration_cast<std::chrono::seconds>(c.water_all_debounce).count()},
       {"weed_clear_radius_mm", c.weed_clear_radius_mm},
       {"gantry_update_interval_s", c.gantry_update_interval_s},
       {"checkpoint_every", c.checkpoint_every},
       {"epoch", format_iso8601(c.epoch)}};
  if (c.simulator_field_override) j["simulator_field_override"] = *c.simulator_field_override;
}

void from_json(const nlohmann::json& j, GardenConfig& c) {
  c = GardenConfig{};
  if (j.contains("field")) c.field = j.at("field").get<gantry::FieldConfig>();
  if (j.contains("species")) c.species = policy::SpeciesCatalog::from_json(j.at("species"));
  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    c.policy.overwater_threshold = p.value("overwater_threshold", c.policy.overwater_threshold);
    if (p.contains("repeat_window_s")) c.policy.repeat_window = std::chrono::seconds(p.at("repeat_window_s").get<std::int64_t>());
    c.policy.automated_rejects_care = p.value("automated_rejects_care", c.policy.automated_rejects_care);
  }
  if (j.contains("compiler")) {
    const auto& p = j.at("compiler");
    c.compiler.scan_grid_mm = p.value("scan_grid_mm", c.compiler.scan_grid_mm);
    c.compiler.rotary_spin_s = p.value("rotary_spin_s", c.compiler.rotary_spin_s);
  }
  if (j.contains("planner")) c.planner = j.at("planner").get<sched::PlannerConfig>();
  if (j.contains("growth")) c.growth = j.at("growth").get<field::GrowthConfig>();
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    c.noise.bias_sigma = n.value("bias_sigma", 0.0);
    c.noise.daily_sigma = n.value("daily_sigma", 0.0);
    c.noise.seed = n.value("seed", std::uint64_t{1});
  }
  c.queue_capacity = j.value("queue_capacity", c.queue_capacity);
  if (j.contains("water_all_debounce_s"))
    c.water_all_debounce = std::chrono::seconds(j.at("water_all_debounce_s").get<std::int64_t>());
  c.weed_clear_radius_mm = j.value("weed_clear_radius_mm", c.weed_clear_radius_mm);
  c.gantry_update_interval_s = j.value("gantry_update_interval_s", c.gantry_update_interval_s);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  if (j.contains("epoch")) c.epoch = parse_iso8601(j.at("epoch").get<std::string>());
  if (j.contains("simulator_field_override"))
    c.simulator_field_override = j.at("simulator_field_override").get<gantry::FieldConfig>();
}

void to_json(nlohmann::json& j, const UserRecord& u) {
  j = {{"user_id", u.user_id},
       {"display_name", u.display_name},
       {"plot_id", u.plot_id},
       {"credential_hash", u.credential_hash}};
}

void from_json(const nlohmann::json& j, UserRecord& u) {
  u.user_id = j.at("user_id").get<std::string>();
  u.display_name = j.at("display_name").get<std::string>();
  u.plot_id = j.at("plot_id").get<int>();
  u.credential_hash = j.at("credential_hash").get<std::string>();
}

void to_json(nlohmann::json& j, const ChatMessage& m) {
  j = {{"id", m.id},
       {"sender", m.sender},
       {"timestamp", format_iso8601(m.timestamp)},
       {"timestamp_us", to_micros(m.timestamp)},
       {"text", m.text}};
}

void from_json(const nlohmann::json& j, ChatMessage& m) {
  m.id = j.at("id").get<std::int64_t>();
  m.sender = j.at("sender").get<std::string>();
  m.timestamp = from_micros(j.at("timestamp_us").get<std::int64_t>());
  m.text = j.at("text").get<std::string>();
}

void to_json(nlohmann::json& j, const GardenState& s) {
  nlohmann::json bay = nlohmann::json::array();
  for (const auto t : s.bay) bay.push_back(gantry::to_string(t));
  nlohmann::json water_all = nlohmann::json::object();
  for (const auto& [k, t] : s.water_all_last) water_all[k] = to_micros(t);
  nlohmann::json queue = nlohmann::json::array();
  for (const auto& [id, e] : s.queue.entries()) queue.push_back(e);
  nlohmann::json timeline = nlohmann::json::array();
  for (const auto& e : s.timeline.events()) timeline.push_back(e);
  j = {{"field", s.field},
       {"gantry", s.gantry},
       {"bay", bay},
       {"queue", queue},
       {"queue_capacity", s.queue.capacity()},
       {"modes", s.modes},
       {"timeline", timeline},
       {"frames", s.frames},
       {"chat", s.chat},
       {"users", s.users},
       {"water_all_last", water_all},
       {"planner_days", s.planner_days.days()},
       {"rejections", s.rejections},
       {"next_task_id", s.next_task_id},
       {"next_chat_id", s.next_chat_id},
       {"day", s.day},
       {"day_open", s.day_open},
       {"now_us", to_micros(s.now)},
       {"last_script_step", s.last_script_step}};
}

void from_json(const nlohmann::json& j, GardenState& s) {
  s.field = j.at("field").get<field::FieldState>();
  s.gantry = j.at("gantry").get<gantry::GantryState>();
  s.bay.clear();
  for (const auto& t : j.at("bay")) {
    const auto tool = gantry::tool_from_string(t.get<std::string>());
    if (!tool) throw Error(ErrorCode::kCorruptLog, "unknown tool in checkpoint");
    s.bay.insert(*tool);
  }
  std::map<tasks::TaskId, sched::QueueEntry> entries;
  for (const auto& e : j.at("queue")) {
    auto entry = e.get<sched::QueueEntry>();
    entries.emplace(entry.task.id, std::move(entry));
  }
  s.queue = sched::TaskQueue(j.at("queue_capacity").get<std::size_t>());
  s.queue.restore(std::move(entries));
  s.modes = j.at("modes").get<policy::ModeTable>();
  s.timeline = field::Timeline{};
  for (const auto& e : j.at("timeline")) {
    auto ev = e.get<field::TimelineEvent>();
    const auto expected = ev.id;
    if (s.timeline.append(std::move(ev)) != expected) throw Error(ErrorCode::kCorruptLog, "timeline ids out of order");
  }
  s.frames = j.at("frames").get<std::vector<field::SnapshotFrame>>();
  s.chat = j.at("chat").get<std::vector<ChatMessage>>();
  s.users = j.at("users").get<std::map<std::string, UserRecord>>();
  s.water_all_last.clear();
  for (const auto& [k, v] : j.at("water_all_last").items()) s.water_all_last[k] = from_micros(v.get<std::int64_t>());
  s.planner_days.restore(j.at("planner_days").get<std::set<int>>());
  s.rejections = j.at("rejections").get<std::map<std::string, std::int64_t>>();
  s.next_task_id = j.at("next_task_id").get<tasks::TaskId>();
  s.next_chat_id = j.at("next_chat_id").get<std::int64_t>();
  s.day = j.at("day").get<int>();
  s.day_open = j.at("day_open").get<bool>();
  s.now = from_micros(j.at("now_us").get<std::int64_t>());
  s.last_script_step = j.at("last_script_step").get<std::int64_t>();
}

}  // namespace plotbot::garden

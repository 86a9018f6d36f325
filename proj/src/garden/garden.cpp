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

#include "plotbot/garden/garden.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "plotbot/error.hpp"
#include "plotbot/overloaded.hpp"

namespace plotbot::garden {

using nlohmann::json;
using sched::EntryState;
using sched::QueueEntry;

json plant_view(const field::Plant& p) {
  json j = p;
  j.erase("daily_moisture");
  return j;
}

json weed_view(const field::WeedMark& w) { return {{"id", w.id}, {"position", w.position}, {"plot_id", w.plot_id}}; }

namespace {

// Box-Muller over mt19937_64 so draws are identical on every platform
// (std::normal_distribution is implementation-defined).
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double operator()(double sigma) {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z * sigma;
    }
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2) * sigma;
  }

 private:
  std::mt19937_64 rng_;
  std::optional<double> spare_;
};

std::uint64_t day_seed(std::uint64_t seed, int day) {
  std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(day + 1));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

field::EventKind event_kind_of(const tasks::TaskKind& k) {
  return std::visit(Overloaded{
                        [](const tasks::Sow&) { return field::EventKind::sow; },
                        [](const tasks::Water&) { return field::EventKind::water; },
                        [](const tasks::Weed&) { return field::EventKind::weed; },
                        [](const tasks::Scan&) { return field::EventKind::scan; },
                        [](const tasks::MoistureRead&) { return field::EventKind::moisture_read; },
                    },
                    k);
}

Timestamp at_of(const json& r) { return from_micros(r.at("at").get<std::int64_t>()); }

std::string debounce_key(const std::string& user, int plot) { return fmt::format("{}/{}", user, plot); }

[[noreturn]] void diverged(const std::string& what) {
  throw Error(ErrorCode::kReplayDivergence, fmt::format("replay diverged: {}", what));
}

}  // namespace

Garden::Garden(GardenConfig config, std::unique_ptr<field::EventLog> log)
    : config_(std::move(config)),
      sim_(config_.simulator_field_override.value_or(config_.field)),
      clock_(config_.epoch),
      log_(std::move(log)) {
  config_.validate();
  state_.field = field::FieldState(config_.field);
  sim_.set_clock(config_.epoch);
  sync_gantry();
  state_.queue = sched::TaskQueue(config_.queue_capacity);
  state_.now = config_.epoch;

  if (config_.noise.enabled()) {
    Gaussian g(config_.noise.seed);
    noise_bias_.resize(state_.field.soil.values().size());
    for (auto& b : noise_bias_) b = g(config_.noise.bias_sigma);
  }
  if (log_ && log_->record_count() == 0)
    log_->append({{"type", "genesis"}, {"at", to_micros(config_.epoch)}, {"config", config_}});
}

std::unique_ptr<Garden> Garden::restore(const field::LogContents& contents,
                                        std::unique_ptr<field::EventLog> continue_log, RestoreOptions options) {
  if (!options.recover_prefix) field::require_intact(contents);
  const auto& records = contents.records;
  if (records.empty() || records.front().value("type", "") != "genesis")
    throw Error(ErrorCode::kCorruptLog, "log does not start with a genesis record",
                {{"last_valid_id", contents.last_valid_seq}, {"valid_bytes", contents.valid_bytes}});

  auto g = std::make_unique<Garden>(records.front().at("config").get<GardenConfig>());

  std::size_t start = 1;
  for (std::size_t i = records.size(); i-- > 1;) {
    if (records[i].at("type") == "checkpoint") {
      g->state_ = records[i].at("state").get<GardenState>();
      g->sim_.restore(g->state_.gantry, g->state_.bay);
      g->clock_.advance_to(g->state_.now);
      for (const auto& [id, e] : g->state_.queue.entries()) g->clock_.observe_stamp(e.enqueued_at);
      start = i + 1;
      break;
    }
  }

  // Executions whose effects never became final: explicitly interrupted ones
  // and a trailing start without a finish.
  std::set<tasks::TaskId> skip;
  std::optional<tasks::TaskId> open;
  for (std::size_t i = start; i < records.size(); ++i) {
    const auto type = records[i].at("type").get<std::string>();
    if (type == "execution_started") open = records[i].at("task_id").get<tasks::TaskId>();
    if (type == "execution_finished") open.reset();
    if (type == "execution_interrupted") {
      skip.insert(records[i].at("task_id").get<tasks::TaskId>());
      open.reset();
    }
  }
  if (open) skip.insert(*open);

  g->replaying_ = true;
  for (std::size_t i = start; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.at("type") == "checkpoint") continue;
    if (r.at("type") == "execution_started") {
      g->clock_.advance_to(at_of(r));
      g->state_.now = at_of(r);
      if (r.contains("step")) g->state_.last_script_step = std::max(g->state_.last_script_step, r.at("step").get<std::int64_t>());
      g->apply_execution_started(r, !skip.contains(r.at("task_id").get<tasks::TaskId>()));
      continue;
    }
    g->apply(r, false);
  }
  g->replaying_ = false;
  g->records_since_checkpoint_ = static_cast<int>(records.size() - start);
  g->log_ = std::move(continue_log);

  if (g->in_flight_) {
    std::unique_lock lock(g->mu_);
    g->commit({{"type", "execution_interrupted"}, {"task_id", g->in_flight_->task_id}});
  }
  return g;
}

void Garden::attach_sink(EventSink* sink) {
  std::unique_lock lock(mu_);
  sink_ = sink;
}

void Garden::set_script_step(std::optional<std::int64_t> step) {
  std::unique_lock lock(mu_);
  script_step_ = step;
}

// --- plumbing ---------------------------------------------------------------

void Garden::commit(json record) {
  record["at"] = to_micros(clock_.now());
  if (script_step_) record["step"] = *script_step_;
  apply(record, true);
  append(std::move(record));
}

void Garden::append(json record) {
  if (!log_) return;
  log_->append(std::move(record));
  ++records_since_checkpoint_;
}

void Garden::publish(std::string topic, std::string type, json data) {
  if (!sink_ || replaying_) return;
  sink_->publish(Delta{std::move(topic), std::move(type), state_.now, std::move(data)});
}

void Garden::sync_gantry() {
  state_.gantry = sim_.state();
  state_.bay = sim_.tool_bay();
}

void Garden::maybe_checkpoint(bool force) {
  if (!log_ || in_flight_) return;
  if (!force && (config_.checkpoint_every <= 0 || records_since_checkpoint_ < config_.checkpoint_every)) return;
  log_->append({{"type", "checkpoint"}, {"at", to_micros(state_.now)}, {"state", state_}});
  records_since_checkpoint_ = 0;
}

void Garden::checkpoint() {
  std::unique_lock lock(mu_);
  maybe_checkpoint(true);
}

void Garden::publish_entry(const QueueEntry& e) { publish("queue", "entry", {{"entry", e}}); }

void Garden::publish_plant(const field::Plant& p) { publish("field", "plant", {{"plant", plant_view(p)}}); }

// --- apply --------------------------------------------------------------------

void Garden::apply(const json& r, bool live) {
  const auto at = at_of(r);
  clock_.advance_to(at);
  state_.now = at;
  if (r.contains("step")) state_.last_script_step = std::max(state_.last_script_step, r.at("step").get<std::int64_t>());
  const auto type = r.at("type").get<std::string>();

  if (type == "user_registered") {
    UserRecord u{r.at("user_id"), r.at("display_name"), r.at("plot_id"), r.at("credential_hash")};
    state_.modes.add_user(u.user_id, policy::mode_from_string(r.at("mode").get<std::string>()).value(), at);
    state_.users[u.user_id] = std::move(u);
  } else if (type == "login" || type == "logout") {
    const auto user = r.at("user_id").get<std::string>();
    field::TimelineEvent ev;
    ev.timestamp = at;
    ev.actor = user;
    ev.kind = type == "login" ? field::EventKind::login : field::EventKind::logout;
    ev.plot_id = state_.plot_of(user);
    if (r.contains("reason")) ev.payload["reason"] = r.at("reason");
    ev.id = state_.timeline.append(ev);
    publish("timeline", "event", ev);
  } else if (type == "mode_switched") {
    const auto user = r.at("user_id").get<std::string>();
    const auto change = state_.modes.switch_mode(user, policy::mode_from_string(r.at("mode").get<std::string>()).value(), at);
    field::TimelineEvent ev;
    ev.timestamp = at;
    ev.actor = user;
    ev.kind = field::EventKind::mode_switch;
    ev.plot_id = state_.plot_of(user);
    ev.payload = {{"old", policy::to_string(change.old_mode)}, {"new", policy::to_string(change.new_mode)}};
    ev.id = state_.timeline.append(ev);
    publish("timeline", "event", ev);
  } else if (type == "task_submitted") {
    apply_task_submitted(r.at("entry"));
  } else if (type == "planner_ran") {
    state_.planner_days.claim(r.at("day").get<int>());
    for (const auto& e : r.at("entries")) apply_task_submitted(e);
    for (const auto& name : r.at("rejected")) ++state_.rejections[name.get<std::string>()];
  } else if (type == "submission_rejected") {
    for (const auto& name : r.at("reasons")) ++state_.rejections[name.get<std::string>()];
  } else if (type == "task_cancelled") {
    const auto id = r.at("task_id").get<tasks::TaskId>();
    const auto& e = state_.queue.cancel(id, r.at("user_id").get<std::string>());
    state_.field.reservations.erase(id);
    publish_entry(e);
  } else if (type == "execution_started") {
    apply_execution_started(r, true);
  } else if (type == "execution_finished") {
    apply_execution_finished(r, !live);
  } else if (type == "execution_interrupted") {
    apply_execution_interrupted(r);
  } else if (type == "day_started") {
    apply_day_started(r);
  } else if (type == "day_ended") {
    apply_day_ended(r);
  } else if (type == "chat_posted") {
    auto m = r.at("message").get<ChatMessage>();
    state_.next_chat_id = std::max(state_.next_chat_id, m.id + 1);
    state_.chat.push_back(m);
    publish("chat", "message", m);
  } else if (type == "feedback_posted") {
    const auto user = r.at("user_id").get<std::string>();
    field::TimelineEvent ev;
    ev.timestamp = at;
    ev.actor = user;
    ev.kind = field::EventKind::system;
    ev.plot_id = state_.plot_of(user);
    ev.payload = {{"event", "feedback"}, {"text", r.at("text")}};
    ev.id = state_.timeline.append(ev);
    publish("timeline", "event", ev);
  } else if (type == "weed_added") {
    field::WeedMark w{state_.field.next_weed_id++, r.at("position").get<Coord2>(), r.at("plot_id").get<int>()};
    state_.field.weeds[w.id] = w;
    publish("field", "weed_added", {{"weed", weed_view(w)}});
  } else if (type == "plant_removed") {
    const auto id = r.at("plant_id").get<field::PlantId>();
    auto& p = state_.field.plants.at(id);
    p.state = field::PlantState::removed;
    publish_plant(p);
    field::TimelineEvent ev;
    ev.timestamp = at;
    ev.actor = r.at("user_id").get<std::string>();
    ev.kind = field::EventKind::system;
    ev.plot_id = p.plot_id;
    ev.payload = {{"event", "plant_removed"}, {"plant_id", id}};
    ev.id = state_.timeline.append(ev);
    publish("timeline", "event", ev);
  } else if (type == "genesis" || type == "checkpoint") {
    // nothing to fold
  } else {
    throw Error(ErrorCode::kCorruptLog, fmt::format("unknown record type '{}'", type));
  }
}

void Garden::apply_task_submitted(const json& j) {
  auto entry = j.get<QueueEntry>();
  const auto id = entry.task.id;
  state_.next_task_id = std::max(state_.next_task_id, id + 1);
  clock_.observe_stamp(entry.enqueued_at);
  if (const auto* sow = std::get_if<tasks::Sow>(&entry.task.kind); sow && sow->target)
    state_.field.reservations[id] = {id, entry.task.user_id, sow->species, *sow->target};
  if (const auto* w = std::get_if<tasks::Water>(&entry.task.kind);
      w && w->water_all_plot && entry.task.origin == tasks::Origin::user)
    state_.water_all_last[debounce_key(entry.task.user_id, *w->water_all_plot)] = entry.enqueued_at;
  state_.queue.push(std::move(entry));
  publish_entry(state_.queue.entry(id));
}

void Garden::apply_day_started(const json& r) {
  const int day = r.at("day").get<int>();
  const bool raining = r.at("raining").get<bool>();
  const auto& m = config_.field.moisture;
  auto& soil = state_.field.soil;
  soil.scale_and_add(raining ? m.rain_day_decay : m.daily_decay, raining ? m.rain_gain : 0.0);
  if (config_.noise.enabled()) {
    Gaussian g(day_seed(config_.noise.seed, day));
    auto values = soil.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i)
      values[i] = std::clamp(values[i] + noise_bias_[i] + g(config_.noise.daily_sigma), 0.0, 1.0);
  }
  state_.day = day;
  state_.day_open = true;
  publish("field", "day_started", {{"day", day}, {"raining", raining}});
}

void Garden::apply_day_ended(const json& r) {
  const int day = r.at("day").get<int>();
  const auto report = field::growth_tick(state_.field, config_.species, day, config_.growth);
  for (const auto id : report.germinated) publish_plant(state_.field.plants.at(id));
  for (const auto id : report.grown) publish_plant(state_.field.plants.at(id));

  state_.frames.push_back(field::capture_frame(state_.field, day, state_.now, field::Perspective::topdown));
  field::TimelineEvent ev;
  ev.timestamp = state_.now;
  ev.actor = std::string(tasks::kRobotActor);
  ev.kind = field::EventKind::system;
  ev.payload = {{"event", "daily_snapshot"},
                {"day", day},
                {"frame_index", state_.frames.size() - 1},
                {"germinated", report.germinated.size()}};
  ev.id = state_.timeline.append(ev);
  state_.day_open = false;
  publish("field", "frame", {{"day_index", day}, {"frame_index", state_.frames.size() - 1}});
  publish("timeline", "event", ev);
}

void Garden::apply_execution_started(const json& r, bool execute_task) {
  if (in_flight_) diverged("execution started while another is in flight");
  const auto id = r.at("task_id").get<tasks::TaskId>();
  const auto start = at_of(r);
  const auto* head = state_.queue.head();
  if (!head || head->task.id != id) diverged(fmt::format("task {} is not at the queue head", id));
  const auto& entry = state_.queue.begin_next(start);
  publish_entry(entry);
  if (execute_task) {
    execute(entry, start);
  } else {
    in_flight_ = InFlight{id, start, {}, EntryState::failed, json::object()};
  }
}

void Garden::execute(const QueueEntry& entry, Timestamp start) {
  InFlight f{entry.task.id, start, {}, EntryState::done, json::object()};
  const auto& task = entry.task;
  sim_.set_clock(std::max(start, sim_.state().sim_clock));
  std::optional<field::PlantId> sown;
  int images = 0;

  const auto publish_gantry = [&](const gantry::GantryState& g, Timestamp at) {
    if (!sink_ || replaying_) return;
    sink_->publish(Delta{"field", "gantry", at, {{"state", g}, {"task_id", task.id}}});
  };

  Coord3 prev = sim_.state().position;
  Timestamp prev_t = sim_.state().sim_clock;
  const auto observer = [&](const tasks::StepRecord& rec) {
    const auto now = rec.after.sim_clock;
    if (std::holds_alternative<tasks::MoveTo>(rec.step) && sink_ && !replaying_) {
      const double total = to_seconds(now - prev_t);
      const auto plan = gantry::MotionPlan{total, prev, rec.after.position};
      for (double t = config_.gantry_update_interval_s; t < total; t += config_.gantry_update_interval_s) {
        auto mid = rec.after;
        mid.position = plan.position_at(t, sim_.config().axis_speed);
        mid.busy = true;
        mid.sim_clock = prev_t + seconds_to_duration(t);
        publish_gantry(mid, mid.sim_clock);
      }
    }
    state_.now = std::max(state_.now, now);
    if (const auto* act = std::get_if<tasks::Actuate>(&rec.step)) {
      const auto& res = *rec.result;
      json actuation = {{"task_id", task.id}, {"action", gantry::action_name(act->action)}, {"at", res.at}};
      if (res.released_seed) {
        field::Plant p;
        p.plot_id = state_.field.plot_at(res.at.xy()).value_or(state_.plot_of(task.user_id).value_or(0));
        p.owner = task.user_id;
        p.species_id = *res.released_seed;
        p.position = res.at.xy();
        p.sown_at = now;
        p.sown_day = state_.day;
        const auto id = state_.field.add_plant(std::move(p));
        state_.field.reservations.erase(task.id);
        sown = id;
        f.effects["plant_id"] = id;
        actuation["plant_id"] = id;
        publish_plant(state_.field.plants.at(id));
      }
      if (std::holds_alternative<gantry::DispenseWater>(act->action) && act->plant) {
        auto& p = state_.field.plants.at(*act->plant);
        p.last_watered_at = now;
        f.effects["watered"].push_back(p.id);
        actuation["plant_id"] = p.id;
        publish_plant(p);
      }
      if (std::holds_alternative<gantry::RotarySpin>(act->action)) {
        const auto here = res.at.xy();
        const std::int64_t r = config_.weed_clear_radius_mm;
        for (auto it = state_.field.weeds.begin(); it != state_.field.weeds.end();) {
          if (squared_distance(it->second.position, here) <= r * r) {
            f.effects["weeds_removed"].push_back(it->first);
            publish("field", "weed_removed", {{"id", it->first}});
            it = state_.field.weeds.erase(it);
          } else {
            ++it;
          }
        }
      }
      if (res.moisture) {
        f.effects["moisture"] = *res.moisture;
        actuation["moisture"] = *res.moisture;
      }
      if (res.image) ++images;
      publish("field", "actuation", actuation);
    }
    publish_gantry(rec.after, now);
    prev = rec.after.position;
    prev_t = now;
  };

  try {
    const tasks::CompileContext ctx{config_.field, config_.species, state_.field, config_.compiler};
    const auto steps = tasks::compile(task, ctx, sim_.state());
    tasks::replay(steps, sim_, state_.field.soil, observer);
  } catch (const Error& e) {
    f.state = EntryState::failed;
    f.result.error = e.code();
    f.result.message = e.what();
    sim_.recover();
  } catch (const std::exception& e) {
    f.state = EntryState::failed;
    f.result.error = ErrorCode::kInvalidArgument;
    f.result.message = e.what();
    sim_.recover();
  }
  if (!sown) state_.field.reservations.erase(task.id);
  if (images > 0) f.effects["images"] = images;
  sync_gantry();
  publish_gantry(state_.gantry, state_.gantry.sim_clock);
  f.result.started_at = start;
  f.result.finished_at = state_.gantry.sim_clock;
  f.result.duration_s = to_seconds(state_.gantry.sim_clock - start);
  in_flight_ = std::move(f);
}

std::int64_t Garden::append_task_event(const QueueEntry& entry, const sched::ExecutionResult& result,
                                       EntryState st, const json& effects) {
  const auto& task = entry.task;
  field::TimelineEvent ev;
  ev.timestamp = result.finished_at.value_or(state_.now);
  ev.actor = task.origin == tasks::Origin::auto_planner ? std::string(tasks::kRobotActor) : task.user_id;
  ev.kind = event_kind_of(task.kind);
  ev.task_id = task.id;
  ev.status = st == EntryState::done ? "done" : "failed";
  if (const auto* scan = std::get_if<tasks::Scan>(&task.kind)) {
    ev.plot_id = scan->plot;
  } else if (effects.contains("plant_id")) {
    ev.plot_id = state_.field.plants.at(effects.at("plant_id").get<field::PlantId>()).plot_id;
  } else {
    ev.plot_id = state_.plot_of(task.user_id);
  }
  ev.payload = {{"task", task.kind},
                {"origin", tasks::to_string(task.origin)},
                {"on_behalf_of", task.user_id},
                {"duration_s", result.duration_s},
                {"effects", effects}};
  if (result.error) {
    ev.payload["error"] = {{"code", static_cast<int>(*result.error)},
                           {"name", error_name(*result.error)},
                           {"message", result.message}};
  }
  ev.id = state_.timeline.append(ev);
  publish("timeline", "event", ev);
  return ev.id;
}

void Garden::apply_execution_finished(const json& r, bool verify) {
  const auto id = r.at("task_id").get<tasks::TaskId>();
  if (!in_flight_ || in_flight_->task_id != id) diverged(fmt::format("finish for task {} without a start", id));
  auto f = std::move(*in_flight_);
  in_flight_.reset();
  if (verify) {
    const auto rec = r.at("result").get<sched::ExecutionResult>();
    if (r.at("state").get<std::string>() != sched::to_string(f.state) || rec.error != f.result.error ||
        rec.finished_at != f.result.finished_at)
      diverged(fmt::format("task {} finished differently on replay", id));
  }
  const auto& entry = state_.queue.entry(id);
  f.result.timeline_event_id = append_task_event(entry, f.result, f.state, f.effects);
  const auto& done = state_.queue.finish(id, f.state, f.result);
  publish_entry(done);
}

void Garden::apply_execution_interrupted(const json& r) {
  const auto id = r.at("task_id").get<tasks::TaskId>();
  if (!in_flight_ || in_flight_->task_id != id) diverged(fmt::format("interrupt for task {} without a start", id));
  auto f = std::move(*in_flight_);
  in_flight_.reset();
  sim_.recover();
  sync_gantry();
  state_.field.reservations.erase(id);
  sched::ExecutionResult result;
  result.error = ErrorCode::kExecutionInterrupted;
  result.message = "execution interrupted; robot recovered to home with tools in the bay";
  result.started_at = f.started;
  result.finished_at = at_of(r);
  const auto& entry = state_.queue.entry(id);
  result.timeline_event_id = append_task_event(entry, result, EntryState::failed, json::object());
  const auto& done = state_.queue.finish(id, EntryState::failed, result);
  publish_entry(done);
  publish("field", "gantry", {{"state", state_.gantry}, {"task_id", id}});
}

// --- commands -----------------------------------------------------------------

void Garden::register_user(const std::string& user_id, const std::string& display_name, int plot_id,
                           const std::string& credential_hash, policy::ControlMode mode) {
  std::unique_lock lock(mu_);
  if (user_id.empty() || user_id == tasks::kRobotActor)
    throw Error(ErrorCode::kInvalidArgument, fmt::format("'{}' is not a valid user id", user_id));
  if (state_.users.contains(user_id))
    throw Error(ErrorCode::kInvalidArgument, fmt::format("user {} already exists", user_id));
  state_.field.plot(plot_id);
  for (const auto& [id, u] : state_.users)
    if (u.plot_id == plot_id)
      throw Error(ErrorCode::kInvalidArgument, fmt::format("plot {} is already assigned to {}", plot_id, id));
  commit({{"type", "user_registered"},
          {"user_id", user_id},
          {"display_name", display_name},
          {"plot_id", plot_id},
          {"credential_hash", credential_hash},
          {"mode", policy::to_string(mode)}});
}

void Garden::record_login(const std::string& user_id) {
  std::unique_lock lock(mu_);
  if (!state_.user(user_id)) throw Error(ErrorCode::kUnknownUser, fmt::format("no user {}", user_id));
  commit({{"type", "login"}, {"user_id", user_id}});
}

void Garden::record_logout(const std::string& user_id, const std::string& reason) {
  std::unique_lock lock(mu_);
  if (!state_.user(user_id)) throw Error(ErrorCode::kUnknownUser, fmt::format("no user {}", user_id));
  commit({{"type", "logout"}, {"user_id", user_id}, {"reason", reason}});
}

policy::ModeChange Garden::switch_mode(const std::string& user_id, policy::ControlMode mode) {
  std::unique_lock lock(mu_);
  if (!state_.user(user_id)) throw Error(ErrorCode::kUnknownUser, fmt::format("no user {}", user_id));
  commit({{"type", "mode_switched"}, {"user_id", user_id}, {"mode", policy::to_string(mode)}});
  return state_.modes.log().back();
}

json Garden::prepare_submission(const std::string& user_id, tasks::TaskKind kind, tasks::Origin origin,
                                Timestamp now) {
  const bool robot = origin == tasks::Origin::auto_planner && user_id == tasks::kRobotActor;
  const auto* user = state_.user(user_id);
  if (!user && !robot) throw Error(ErrorCode::kUnknownUser, fmt::format("no user {}", user_id));
  const int plot = user ? user->plot_id : -1;
  const auto mode = user ? state_.modes.mode_of(user_id) : policy::ControlMode::automated;

  if (auto* w = std::get_if<tasks::Water>(&kind); w && w->water_all_plot && *w->water_all_plot == plot && w->plants.empty()) {
    for (const auto* p : state_.field.live_plants_in_plot(plot)) w->plants.push_back(p->id);
  }
  tasks::TaskRequest t{state_.next_task_id, user_id, std::move(kind), now, origin};
  const policy::ValidationContext vctx{state_.field, config_.species, plot, now, config_.policy};
  auto outcome = policy::validate(t, mode, vctx);
  if (outcome.verdict == policy::Verdict::rejected) {
    std::vector<std::string> rules;
    for (const auto& f : outcome.findings) rules.push_back(f.rule_id);
    throw Error(ErrorCode::kTaskRejected,
                fmt::format("{} rejected in {} mode: {}", tasks::kind_name(t.kind), policy::to_string(mode),
                            outcome.findings.front().reason),
                {{"validation", outcome}, {"rules", rules}});
  }
  // Placement is delegated after the mode check accepted the open target.
  if (auto* s = std::get_if<tasks::Sow>(&t.kind); s && !s->target && user) {
    const auto& spec = config_.species.at(s->species);
    const auto occ = policy::occupants(state_.field, config_.species);
    s->target = policy::auto_place(spec, 1, state_.field.plot(plot), occ).front();
  }
  if (const auto* w = std::get_if<tasks::Water>(&t.kind); w && w->water_all_plot && origin == tasks::Origin::user) {
    const auto it = state_.water_all_last.find(debounce_key(user_id, *w->water_all_plot));
    if (it != state_.water_all_last.end() && now - it->second < config_.water_all_debounce) {
      const double retry = to_seconds(config_.water_all_debounce - (now - it->second));
      throw Error(ErrorCode::kDuplicateWithinDebounce,
                  fmt::format("Water All for plot {} was already requested {:.0f} s ago", *w->water_all_plot,
                              to_seconds(now - it->second)),
                  {{"retry_after_s", retry}});
    }
  }
  state_.queue.check_capacity();

  const tasks::CompileContext cctx{config_.field, config_.species, state_.field, config_.compiler};
  gantry::GantryState home;
  home.position = config_.field.home_position;
  const auto steps = tasks::compile(t, cctx, home);
  QueueEntry entry;
  entry.estimate_s = tasks::estimate_duration(steps, config_.field);
  entry.task = std::move(t);
  entry.enqueued_at = clock_.stamp();
  entry.validation = std::move(outcome);
  entry.mode = origin == tasks::Origin::auto_planner ? "planner" : std::string(policy::to_string(mode));
  return entry;
}

void Garden::reject(const std::string& user_id, const tasks::TaskKind& kind, const Error& e) {
  json reasons = json::array();
  if (e.code() == ErrorCode::kTaskRejected && e.details().contains("rules")) {
    reasons = e.details().at("rules");
  } else {
    reasons.push_back(error_name(e.code()));
  }
  commit({{"type", "submission_rejected"},
          {"user_id", user_id},
          {"kind", tasks::kind_name(kind)},
          {"error", static_cast<int>(e.code())},
          {"reasons", reasons}});
}

SubmitResult Garden::submit(const std::string& user_id, tasks::TaskKind kind) {
  std::unique_lock lock(mu_);
  json entry;
  try {
    entry = prepare_submission(user_id, kind, tasks::Origin::user, clock_.now());
  } catch (const Error& e) {
    if (state_.user(user_id)) reject(user_id, kind, e);
    throw;
  }
  const auto id = entry.at("task").at("id").get<tasks::TaskId>();
  commit({{"type", "task_submitted"}, {"entry", entry}});
  const auto& e = state_.queue.entry(id);
  SubmitResult out{e.task, 0, e.estimate_s, e.enqueued_at, e.validation};
  for (const auto* p : state_.queue.pending()) {
    ++out.position;
    if (p->task.id == id) break;
  }
  return out;
}

void Garden::cancel(const std::string& user_id, tasks::TaskId task_id) {
  std::unique_lock lock(mu_);
  const auto& e = state_.queue.entry(task_id);
  if (e.task.user_id != user_id)
    throw Error(ErrorCode::kForbidden, fmt::format("task {} belongs to another user", task_id), {{"task_id", task_id}});
  if (e.state != EntryState::pending)
    throw Error(ErrorCode::kNotCancellable, fmt::format("task {} is {}", task_id, sched::to_string(e.state)),
                {{"task_id", task_id}, {"state", sched::to_string(e.state)}});
  commit({{"type", "task_cancelled"}, {"task_id", task_id}, {"user_id", user_id}});
}

void Garden::inject_interrupt(tasks::TaskId task_id) {
  std::unique_lock lock(mu_);
  interrupts_.insert(task_id);
}

QueueEntry Garden::run_next() {
  tasks::TaskId id = 0;
  Duration busy{};
  {
    std::unique_lock lock(mu_);
    if (in_flight_ || state_.queue.executing())
      throw Error(ErrorCode::kRobotBusy, "the robot is executing another task");
    const auto* head = state_.queue.head();
    if (!head) throw Error(ErrorCode::kQueueEmpty, "no pending tasks");
    id = head->task.id;
    clock_.advance_to(std::max(clock_.now(), state_.gantry.sim_clock));

    const bool cut = interrupts_.erase(id) > 0;
    json started = {{"type", "execution_started"}, {"task_id", id}, {"at", to_micros(clock_.now())}};
    if (script_step_) {
      started["step"] = *script_step_;
      state_.last_script_step = std::max(state_.last_script_step, *script_step_);
    }
    state_.now = clock_.now();
    apply_execution_started(started, !cut);
    append(std::move(started));

    if (cut) {
      commit({{"type", "execution_interrupted"}, {"task_id", id}});
      maybe_checkpoint(false);
      return state_.queue.entry(id);
    }
    busy = *in_flight_->result.finished_at - in_flight_->started;
  }

  // Serve mode: the entry stays "executing" while wall time catches up.
  clock_.pace(busy);

  std::unique_lock lock(mu_);
  const auto& f = *in_flight_;
  clock_.advance_to(*f.result.finished_at);
  commit({{"type", "execution_finished"},
          {"task_id", id},
          {"state", sched::to_string(f.state)},
          {"result", f.result},
          {"effects", f.effects}});
  maybe_checkpoint(false);
  return state_.queue.entry(id);
}

int Garden::run_until(Timestamp until) {
  int n = 0;
  for (;;) {
    {
      std::shared_lock lock(mu_);
      if (!state_.queue.head() || std::max(clock_.now(), state_.gantry.sim_clock) >= until) break;
    }
    run_next();
    ++n;
  }
  return n;
}

void Garden::open_day(int day, const sched::DayWeather& weather) {
  std::unique_lock lock(mu_);
  if (state_.day_open) throw Error(ErrorCode::kInvalidArgument, fmt::format("day {} is still open", state_.day));
  if (day != state_.day + 1)
    throw Error(ErrorCode::kInvalidArgument, fmt::format("day {} cannot follow day {}", day, state_.day));
  clock_.advance_to(config_.day_start(day));
  commit({{"type", "day_started"},
          {"day", day},
          {"raining", weather.raining},
          {"rainfall_mm", weather.rainfall_mm},
          {"mean_temperature_c", weather.mean_temperature_c}});
}

std::vector<SubmitResult> Garden::run_planner(int day, const sched::WeatherSample& weather) {
  std::unique_lock lock(mu_);
  if (state_.planner_days.planned(day)) return {};
  std::vector<sched::PlannerUser> users;
  for (const auto& [id, u] : state_.users) users.push_back({id, u.plot_id, state_.modes.mode_of(id)});
  const auto now = clock_.now();
  const auto planned = sched::plan_automated_day(now, weather, state_.field, users, config_.species, config_.planner);

  json entries = json::array();
  json rejected = json::array();
  const auto saved_next = state_.next_task_id;
  const auto saved_queue = state_.queue;
  for (const auto& t : planned) {
    try {
      auto e = prepare_submission(t.user_id, t.kind, tasks::Origin::auto_planner, now);
      // Later entries of the batch see the earlier ones.
      state_.queue.push(e.get<QueueEntry>());
      ++state_.next_task_id;
      entries.push_back(std::move(e));
    } catch (const Error& e) {
      rejected.push_back(error_name(e.code()));
    }
  }
  state_.queue = saved_queue;
  state_.next_task_id = saved_next;
  commit({{"type", "planner_ran"},
          {"day", day},
          {"weather", weather},
          {"entries", entries},
          {"rejected", rejected}});
  std::vector<SubmitResult> out;
  for (const auto& e : entries) {
    const auto& q = state_.queue.entry(e.at("task").at("id").get<tasks::TaskId>());
    out.push_back({q.task, 0, q.estimate_s, q.enqueued_at, q.validation});
  }
  return out;
}

void Garden::close_day(int day) {
  std::unique_lock lock(mu_);
  if (!state_.day_open || state_.day != day)
    throw Error(ErrorCode::kInvalidArgument, fmt::format("day {} is not open", day));
  clock_.advance_to(config_.day_start(day) + std::chrono::seconds(kSecondsPerDay - 1));
  commit({{"type", "day_ended"}, {"day", day}});
  maybe_checkpoint(true);
}

ChatMessage Garden::post_chat(const std::string& user_id, const std::string& text) {
  std::unique_lock lock(mu_);
  if (!state_.user(user_id)) throw Error(ErrorCode::kUnknownUser, fmt::format("no user {}", user_id));
  const auto len = utf8_length(text);
  if (len == 0) throw Error(ErrorCode::kBadRequest, "chat message is empty");
  if (len > kMaxChatCodePoints)
    throw Error(ErrorCode::kMessageTooLong, fmt::format("message has {} characters, limit {}", len, kMaxChatCodePoints),
                {{"length", len}, {"limit", kMaxChatCodePoints}});
  ChatMessage m{state_.next_chat_id, user_id, clock_.now(), text};
  commit({{"type", "chat_posted"}, {"message", m}});
  return state_.chat.back();
}

field::TimelineEvent Garden::post_feedback(const std::string& user_id, const std::string& text) {
  std::unique_lock lock(mu_);
  if (!state_.user(user_id)) throw Error(ErrorCode::kUnknownUser, fmt::format("no user {}", user_id));
  if (text.empty()) throw Error(ErrorCode::kBadRequest, "feedback is empty");
  if (utf8_length(text) > kMaxChatCodePoints)
    throw Error(ErrorCode::kMessageTooLong, "feedback is too long", {{"limit", kMaxChatCodePoints}});
  commit({{"type", "feedback_posted"}, {"user_id", user_id}, {"text", text}});
  return state_.timeline.events().back();
}

field::WeedMark Garden::add_weed(int plot_id, Coord2 position) {
  std::unique_lock lock(mu_);
  if (!state_.field.plot(plot_id).contains(position))
    throw Error(ErrorCode::kCrossPlotTarget, fmt::format("weed position lies outside plot {}", plot_id));
  commit({{"type", "weed_added"}, {"plot_id", plot_id}, {"position", position}});
  return std::prev(state_.field.weeds.end())->second;
}

void Garden::remove_plant(const std::string& user_id, field::PlantId plant_id) {
  std::unique_lock lock(mu_);
  const auto plot = state_.plot_of(user_id);
  if (!plot) throw Error(ErrorCode::kUnknownUser, fmt::format("no user {}", user_id));
  const auto& p = state_.field.plant(plant_id);
  if (!p.live()) throw Error(ErrorCode::kUnknownPlant, fmt::format("plant {} was already removed", plant_id));
  if (p.plot_id != *plot)
    throw Error(ErrorCode::kCrossPlotTarget, fmt::format("plant {} lies outside plot {}", plant_id, *plot),
                {{"plot_id", *plot}});
  commit({{"type", "plant_removed"}, {"user_id", user_id}, {"plant_id", plant_id}});
}

GardenState Garden::snapshot() const {
  std::shared_lock lock(mu_);
  return state_;
}

double Garden::executing_remaining_s() const {
  std::shared_lock lock(mu_);
  if (!in_flight_ || !in_flight_->result.finished_at) return 0.0;
  return std::max(0.0, to_seconds(*in_flight_->result.finished_at - clock_.now()));
}

std::int64_t Garden::log_seq() const {
  std::shared_lock lock(mu_);
  return log_ ? log_->last_seq() : 0;
}

}  // namespace plotbot::garden

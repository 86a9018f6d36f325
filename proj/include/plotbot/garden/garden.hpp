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

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/field/event_log.hpp"
#include "plotbot/garden/state.hpp"
#include "plotbot/sched/clock.hpp"
#include "plotbot/sched/weather.hpp"

namespace plotbot::garden {

// One ordered state change pushed to live subscribers.
struct Delta {
  std::string topic;  // field | queue | timeline | chat
  std::string type;
  Timestamp at{};
  nlohmann::json data;
};

// Wire shapes shared by the stream and the polled documents.
nlohmann::json plant_view(const field::Plant& p);
nlohmann::json weed_view(const field::WeedMark& w);

class EventSink {
 public:
  virtual ~EventSink() = default;
  // Called with the garden's write lock held, in causal order.
  virtual void publish(const Delta& delta) = 0;
};

struct SubmitResult {
  tasks::TaskRequest task;  // with id and resolved targets
  int position = 0;
  double estimate_s = 0.0;
  Timestamp enqueued_at{};
  policy::ValidationOutcome validation;
};

struct RestoreOptions {
  // Accept a damaged tail and continue from the last intact record instead
  // of throwing CorruptLog.
  bool recover_prefix = false;
};

// Single-writer command path over the whole garden: field, gantry, queue,
// modes, timeline, snapshots and chat. Every accepted command is applied
// and then appended to the event log, so state == fold(log) at all times.
// Readers take a shared lock and see a consistent point in time.
class Garden {
 public:
  explicit Garden(GardenConfig config, std::unique_ptr<field::EventLog> log = nullptr);
  // Rebuilds from a log: latest checkpoint, then the records after it. An
  // execution that started but never finished is marked failed
  // (ExecutionInterrupted) and the robot recovered. Further commands append
  // to `continue_log` when given.
  static std::unique_ptr<Garden> restore(const field::LogContents& contents,
                                         std::unique_ptr<field::EventLog> continue_log = nullptr,
                                         RestoreOptions options = {});

  Garden(const Garden&) = delete;
  Garden& operator=(const Garden&) = delete;

  const GardenConfig& config() const { return config_; }
  sched::SimClock& clock() { return clock_; }
  void attach_sink(EventSink* sink);

  // Script cursor stamped on the next committed record (scenario resume).
  void set_script_step(std::optional<std::int64_t> step);

  // --- commands ---------------------------------------------------------
  // Throws InvalidArgument for duplicate users or an occupied/unknown plot.
  void register_user(const std::string& user_id, const std::string& display_name, int plot_id,
                     const std::string& credential_hash, policy::ControlMode mode);
  void record_login(const std::string& user_id);
  void record_logout(const std::string& user_id, const std::string& reason);
  policy::ModeChange switch_mode(const std::string& user_id, policy::ControlMode mode);

  // Validation, Water All expansion, auto-placement, debounce and capacity.
  // Rejections throw (TaskRejected carries the findings in details) and are
  // counted.
  SubmitResult submit(const std::string& user_id, tasks::TaskKind kind);
  void cancel(const std::string& user_id, tasks::TaskId task_id);

  // Executes the queue head. Throws RobotBusy or QueueEmpty.
  sched::QueueEntry run_next();
  // Runs tasks while the robot would start before `until`.
  int run_until(Timestamp until);
  // Test hook: the task's execution is cut off as if the process died.
  void inject_interrupt(tasks::TaskId task_id);

  void open_day(int day, const sched::DayWeather& weather);
  std::vector<SubmitResult> run_planner(int day, const sched::WeatherSample& weather);
  void close_day(int day);

  ChatMessage post_chat(const std::string& user_id, const std::string& text);
  field::TimelineEvent post_feedback(const std::string& user_id, const std::string& text);
  field::WeedMark add_weed(int plot_id, Coord2 position);
  void remove_plant(const std::string& user_id, field::PlantId plant_id);

  void advance_clock(Timestamp t) { clock_.advance_to(t); }
  void checkpoint();

  // --- reads -------------------------------------------------------------
  template <typename F>
  auto read(F&& f) const {
    std::shared_lock lock(mu_);
    return f(state_);
  }
  GardenState snapshot() const;
  // Remaining sim seconds of the executing task, 0 if idle.
  double executing_remaining_s() const;
  std::int64_t log_seq() const;
  const field::EventLog* log() const { return log_.get(); }

 private:
  struct InFlight {
    tasks::TaskId task_id = 0;
    Timestamp started{};
    sched::ExecutionResult result;
    sched::EntryState state = sched::EntryState::done;
    nlohmann::json effects = nlohmann::json::object();
  };

  void commit(nlohmann::json record);
  void apply(const nlohmann::json& record, bool live);
  void append(nlohmann::json record);
  void publish(std::string topic, std::string type, nlohmann::json data);
  void maybe_checkpoint(bool force);
  void sync_gantry();

  void apply_day_started(const nlohmann::json& r);
  void apply_day_ended(const nlohmann::json& r);
  void apply_task_submitted(const nlohmann::json& r);
  void apply_execution_started(const nlohmann::json& r, bool execute);
  void apply_execution_finished(const nlohmann::json& r, bool verify);
  void apply_execution_interrupted(const nlohmann::json& r);
  void execute(const sched::QueueEntry& entry, Timestamp start);
  std::int64_t append_task_event(const sched::QueueEntry& entry, const sched::ExecutionResult& result,
                                 sched::EntryState state, const nlohmann::json& effects);

  // Builds the accepted-task record, or throws.
  nlohmann::json prepare_submission(const std::string& user_id, tasks::TaskKind kind, tasks::Origin origin,
                                    Timestamp now);
  void reject(const std::string& user_id, const tasks::TaskKind& kind, const Error& e);
  void publish_entry(const sched::QueueEntry& e);
  void publish_plant(const field::Plant& p);

  GardenConfig config_;
  gantry::Simulator sim_;
  std::vector<double> noise_bias_;
  sched::SimClock clock_;
  mutable std::shared_mutex mu_;
  GardenState state_;
  std::unique_ptr<field::EventLog> log_;
  EventSink* sink_ = nullptr;
  std::optional<InFlight> in_flight_;
  std::set<tasks::TaskId> interrupts_;
  std::optional<std::int64_t> script_step_;
  int records_since_checkpoint_ = 0;
  bool replaying_ = false;
};

}  // namespace plotbot::garden

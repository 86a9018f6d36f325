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
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/error.hpp"
#include "plotbot/policy/validate.hpp"
#include "plotbot/tasks/task.hpp"

namespace plotbot::sched {

using tasks::TaskId;

enum class EntryState { pending, executing, done, failed, cancelled };

std::string_view to_string(EntryState s) noexcept;
EntryState entry_state_from_string(std::string_view s);

struct ExecutionResult {
  std::optional<std::int64_t> timeline_event_id;
  std::optional<ErrorCode> error;
  std::string message;
  std::optional<Timestamp> started_at;
  std::optional<Timestamp> finished_at;
  double duration_s = 0.0;

  bool operator==(const ExecutionResult&) const = default;
};

struct QueueEntry {
  tasks::TaskRequest task;
  Timestamp enqueued_at{};
  EntryState state = EntryState::pending;
  ExecutionResult result;
  policy::ValidationOutcome validation;
  double estimate_s = 0.0;
  std::string mode;  // requester's control mode at submission, "planner" for auto tasks

  bool operator==(const QueueEntry&) const = default;
};

struct QueueView {
  TaskId task_id = 0;
  std::string user_id;
  std::string kind;
  tasks::Origin origin = tasks::Origin::user;
  EntryState state = EntryState::pending;
  int position = 0;           // 1-based among pending, 0 for the executing entry
  double estimate_s = 0.0;
  double wait_s = 0.0;        // cumulative estimated wait before this entry starts
  Timestamp enqueued_at{};
};

// FCFS queue ordered by (enqueued_at, user_id, task id). Not thread-safe on
// its own; the garden engine serializes access.
class TaskQueue {
 public:
  explicit TaskQueue(std::size_t capacity = 256) : capacity_(capacity) {}

  std::size_t capacity() const { return capacity_; }
  void set_capacity(std::size_t cap) { capacity_ = cap; }

  // Returns the 1-based pending position. Throws Error(kQueueFull).
  int push(QueueEntry entry);
  // Throws Error(kQueueFull) if push would fail, without mutating.
  void check_capacity() const;

  // Moves the head to executing. Throws kRobotBusy or kQueueEmpty.
  QueueEntry& begin_next(Timestamp now);
  // Marks the executing entry done or failed.
  QueueEntry& finish(TaskId id, EntryState state, ExecutionResult result);
  // Throws kUnknownTask, kForbidden (other user's entry), kNotCancellable.
  QueueEntry& cancel(TaskId id, std::string_view user_id);

  const QueueEntry& entry(TaskId id) const;
  bool contains(TaskId id) const { return entries_.contains(id); }
  const QueueEntry* executing() const;
  const QueueEntry* head() const;
  std::vector<const QueueEntry*> pending() const;
  std::size_t pending_count() const { return order_.size(); }
  const std::map<TaskId, QueueEntry>& entries() const { return entries_; }

  // Executing entry first (position 0), then pending in execution order with
  // nondecreasing cumulative waits.
  std::vector<QueueView> snapshot(double executing_remaining_s = 0.0) const;

  bool operator==(const TaskQueue& o) const { return entries_ == o.entries_ && capacity_ == o.capacity_; }

  // Rebuilds order and executing marker from entries.
  void restore(std::map<TaskId, QueueEntry> entries);

 private:
  using Key = std::tuple<Timestamp, std::string, TaskId>;
  static Key key_of(const QueueEntry& e) { return {e.enqueued_at, e.task.user_id, e.task.id}; }

  std::size_t capacity_;
  std::map<TaskId, QueueEntry> entries_;
  std::set<Key> order_;
  std::optional<TaskId> executing_;
};

void to_json(nlohmann::json& j, const ExecutionResult& r);
void from_json(const nlohmann::json& j, ExecutionResult& r);
void to_json(nlohmann::json& j, const QueueEntry& e);
void from_json(const nlohmann::json& j, QueueEntry& e);
void to_json(nlohmann::json& j, const QueueView& v);

}  // namespace plotbot::sched

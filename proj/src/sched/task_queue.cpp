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

#include "plotbot/sched/task_queue.hpp"

#include <fmt/format.h>

namespace plotbot::sched {

std::string_view to_string(EntryState s) noexcept {
  switch (s) {
    case EntryState::pending: return "pending";
    case EntryState::executing: return "executing";
    case EntryState::done: return "done";
    case EntryState::failed: return "failed";
    case EntryState::cancelled: return "cancelled";
  }
  return "pending";
}

EntryState entry_state_from_string(std::string_view s) {
  for (const auto st : {EntryState::pending, EntryState::executing, EntryState::done, EntryState::failed,
                        EntryState::cancelled})
    if (to_string(st) == s) return st;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown queue state '{}'", s));
}

void TaskQueue::check_capacity() const {
  if (order_.size() >= capacity_)
    throw Error(ErrorCode::kQueueFull, fmt::format("queue holds {} pending tasks (cap {})", order_.size(), capacity_),
                {{"capacity", capacity_}});
}

int TaskQueue::push(QueueEntry entry) {
  check_capacity();
  const auto id = entry.task.id;
  if (entries_.contains(id)) throw Error(ErrorCode::kInvalidArgument, fmt::format("task {} already queued", id));
  entry.state = EntryState::pending;
  const auto key = key_of(entry);
  entries_.emplace(id, std::move(entry));
  const auto it = order_.insert(key).first;
  return static_cast<int>(std::distance(order_.begin(), it)) + 1;
}

QueueEntry& TaskQueue::begin_next(Timestamp now) {
  if (executing_) throw Error(ErrorCode::kRobotBusy, fmt::format("task {} is executing", *executing_));
  if (order_.empty()) throw Error(ErrorCode::kQueueEmpty, "no pending tasks");
  const auto id = std::get<2>(*order_.begin());
  order_.erase(order_.begin());
  auto& e = entries_.at(id);
  e.state = EntryState::executing;
  e.result.started_at = now;
  executing_ = id;
  return e;
}

QueueEntry& TaskQueue::finish(TaskId id, EntryState state, ExecutionResult result) {
  if (executing_ != id) throw Error(ErrorCode::kInvalidArgument, fmt::format("task {} is not executing", id));
  auto& e = entries_.at(id);
  e.state = state;
  if (!result.started_at) result.started_at = e.result.started_at;
  e.result = std::move(result);
  executing_.reset();
  return e;
}

QueueEntry& TaskQueue::cancel(TaskId id, std::string_view user_id) {
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::kUnknownTask, fmt::format("no task {}", id), {{"task_id", id}});
  auto& e = it->second;
  if (e.task.user_id != user_id)
    throw Error(ErrorCode::kForbidden, fmt::format("task {} belongs to another user", id), {{"task_id", id}});
  if (e.state != EntryState::pending)
    throw Error(ErrorCode::kNotCancellable, fmt::format("task {} is {}", id, to_string(e.state)),
                {{"task_id", id}, {"state", to_string(e.state)}});
  order_.erase(key_of(e));
  e.state = EntryState::cancelled;
  return e;
}

const QueueEntry& TaskQueue::entry(TaskId id) const {
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::kUnknownTask, fmt::format("no task {}", id), {{"task_id", id}});
  return it->second;
}

const QueueEntry* TaskQueue::executing() const { return executing_ ? &entries_.at(*executing_) : nullptr; }

const QueueEntry* TaskQueue::head() const {
  return order_.empty() ? nullptr : &entries_.at(std::get<2>(*order_.begin()));
}

std::vector<const QueueEntry*> TaskQueue::pending() const {
  std::vector<const QueueEntry*> out;
  out.reserve(order_.size());
  for (const auto& k : order_) out.push_back(&entries_.at(std::get<2>(k)));
  return out;
}

std::vector<QueueView> TaskQueue::snapshot(double executing_remaining_s) const {
  std::vector<QueueView> out;
  double wait = 0.0;
  const auto view = [](const QueueEntry& e) {
    QueueView v;
    v.task_id = e.task.id;
    v.user_id = e.task.user_id;
    v.kind = tasks::kind_name(e.task.kind);
    v.origin = e.task.origin;
    v.state = e.state;
    v.estimate_s = e.estimate_s;
    v.enqueued_at = e.enqueued_at;
    return v;
  };
  if (const auto* ex = executing()) {
    auto v = view(*ex);
    out.push_back(v);
    wait = std::max(0.0, executing_remaining_s);
  }
  int position = 0;
  for (const auto* e : pending()) {
    auto v = view(*e);
    v.position = ++position;
    v.wait_s = wait;
    wait += std::max(0.0, e->estimate_s);
    out.push_back(v);
  }
  return out;
}

void TaskQueue::restore(std::map<TaskId, QueueEntry> entries) {
  entries_ = std::move(entries);
  order_.clear();
  executing_.reset();
  for (const auto& [id, e] : entries_) {
    if (e.state == EntryState::pending) order_.insert(key_of(e));
    if (e.state == EntryState::executing) executing_ = id;
  }
}

void to_json(nlohmann::json& j, const ExecutionResult& r) {
  j = nlohmann::json::object();
  j["timeline_event_id"] = r.timeline_event_id ? nlohmann::json(*r.timeline_event_id) : nlohmann::json();
  j["error"] = r.error ? nlohmann::json(static_cast<int>(*r.error)) : nlohmann::json();
  j["error_name"] = r.error ? nlohmann::json(error_name(*r.error)) : nlohmann::json();
  j["message"] = r.message;
  j["started_at_us"] = r.started_at ? nlohmann::json(to_micros(*r.started_at)) : nlohmann::json();
  j["finished_at_us"] = r.finished_at ? nlohmann::json(to_micros(*r.finished_at)) : nlohmann::json();
  j["duration_s"] = r.duration_s;
}

void from_json(const nlohmann::json& j, ExecutionResult& r) {
  const auto opt_ts = [&](const char* k) -> std::optional<Timestamp> {
    return j.at(k).is_null() ? std::nullopt : std::optional(from_micros(j.at(k).get<std::int64_t>()));
  };
  r.timeline_event_id = j.at("timeline_event_id").is_null()
                            ? std::nullopt
                            : std::optional(j.at("timeline_event_id").get<std::int64_t>());
  r.error = j.at("error").is_null() ? std::nullopt : std::optional(static_cast<ErrorCode>(j.at("error").get<int>()));
  r.message = j.at("message").get<std::string>();
  r.started_at = opt_ts("started_at_us");
  r.finished_at = opt_ts("finished_at_us");
  r.duration_s = j.at("duration_s").get<double>();
}

void to_json(nlohmann::json& j, const QueueEntry& e) {
  j = {{"task", e.task},
       {"enqueued_at_us", to_micros(e.enqueued_at)},
       {"state", to_string(e.state)},
       {"result", e.result},
       {"validation", e.validation},
       {"estimate_s", e.estimate_s},
       {"mode", e.mode}};
}

void from_json(const nlohmann::json& j, QueueEntry& e) {
  e.task = j.at("task").get<tasks::TaskRequest>();
  e.enqueued_at = from_micros(j.at("enqueued_at_us").get<std::int64_t>());
  e.state = entry_state_from_string(j.at("state").get<std::string>());
  e.result = j.at("result").get<ExecutionResult>();
  e.validation = j.at("validation").get<policy::ValidationOutcome>();
  e.estimate_s = j.at("estimate_s").get<double>();
  e.mode = j.value("mode", "");
}

void to_json(nlohmann::json& j, const QueueView& v) {
  j = {{"task_id", v.task_id},
       {"user_id", v.user_id},
       {"kind", v.kind},
       {"origin", tasks::to_string(v.origin)},
       {"state", to_string(v.state)},
       {"position", v.position},
       {"estimate_s", v.estimate_s},
       {"wait_s", v.wait_s},
       {"enqueued_at", format_iso8601(v.enqueued_at)}};
}

}  // namespace plotbot::sched

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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/garden/garden.hpp"
#include "plotbot/scenario/script.hpp"
#include "plotbot/sched/weather.hpp"

namespace plotbot::scenario {

struct WaitStats {
  std::int64_t count = 0;
  double mean_s = 0.0;
  double p50_s = 0.0;
  double p95_s = 0.0;
  double max_s = 0.0;
};

struct PlotCounts {
  int sown = 0;
  int live = 0;
  int germinated = 0;  // germinated or growing
};

struct MetricsReport {
  std::string scenario;
  int days = 0;
  std::uint64_t seed = 0;
  int plants_sown = 0;
  int plants_germinated = 0;
  double germination_rate = 0.0;
  bool radii_nondecreasing = true;
  // kind -> submitting mode (manual/hybrid/automated/planner) -> accepted tasks
  std::map<std::string, std::map<std::string, int>> tasks_by_kind_and_mode;
  std::map<std::string, int> tasks_by_state;
  std::map<std::string, std::int64_t> rejections;
  WaitStats queue_wait;
  std::map<std::string, std::string> mode_day_matrix;  // user -> one letter per day
  std::map<int, PlotCounts> per_plot;
  int sow_events = 0;
  int frames = 0;
  int logins = 0;
  std::vector<int> logins_by_day;
  int timeline_events = 0;
  int chat_messages = 0;
  int action_errors = 0;
};

nlohmann::json to_json(const MetricsReport& r);
std::string summary_table(const MetricsReport& r);

MetricsReport compute_metrics(const Script& script, const garden::GardenState& state,
                              const garden::GardenConfig& config, int action_errors = 0);

struct RunOptions {
  std::optional<std::filesystem::path> log_path;
  bool resume = false;  // continue from the log at log_path
  bool paced = false;   // sleep robot busy time / acceleration
  std::optional<std::uint64_t> seed;
  std::optional<double> acceleration;
  std::set<tasks::TaskId> interrupt;  // executions cut off as if the process died
  garden::EventSink* sink = nullptr;
};

// One entry of the expanded script timeline. Every step commits exactly one
// log record tagged with its number, which is how a resumed run knows where
// to pick up.
struct Step {
  enum class Kind { register_user, open_day, switch_mode, planner, action, close_day };
  std::int64_t n = 0;
  Kind kind = Kind::action;
  int day = 0;
  int second = 0;
  const UserSpec* user = nullptr;
  const ModeSpan* span = nullptr;
  const TimedAction* action = nullptr;
  int sub = 0;  // index within sow xN / weeds N
};

class Runner {
 public:
  Runner(Script script, RunOptions options = {});

  const Script& script() const { return script_; }
  const garden::GardenConfig& config() const { return config_; }
  const std::vector<Step>& steps() const { return steps_; }

  // Fresh garden, or the one rebuilt from the log when resuming.
  std::unique_ptr<garden::Garden> start();
  // Resumes a garden restored elsewhere (crash tests).
  void drive(garden::Garden& g);
  MetricsReport run();

  int action_errors() const { return action_errors_; }

 private:
  Timestamp time_of(const Step& s) const;
  void perform(garden::Garden& g, const Step& s);

  Script script_;
  RunOptions options_;
  garden::GardenConfig config_;
  std::shared_ptr<sched::WeatherProvider> weather_;
  std::vector<Step> steps_;
  int action_errors_ = 0;
};

}  // namespace plotbot::scenario

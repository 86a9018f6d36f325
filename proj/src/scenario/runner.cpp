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

#include "plotbot/scenario/runner.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "plotbot/error.hpp"

namespace plotbot::scenario {

using nlohmann::json;
using garden::Garden;

namespace {

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  // Nearest rank.
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Runner::Runner(Script script, RunOptions options) : script_(std::move(script)), options_(std::move(options)) {
  if (options_.seed) script_.seed = *options_.seed;
  if (options_.acceleration) script_.acceleration = *options_.acceleration;
  config_ = garden_config_for(script_);

  if (script_.weather_trace) {
    weather_ = std::make_shared<sched::TraceWeatherProvider>(sched::load_weather_trace(script_.resolve(*script_.weather_trace)));
  } else {
    weather_ = std::make_shared<sched::StubExternalWeather>(script_.seed, script_.stub_rain_probability.value_or(0.0));
  }

  std::int64_t n = 0;
  for (const auto& u : script_.users) steps_.push_back({++n, Step::Kind::register_user, 0, 0, &u});

  const int planner_second = config_.planner.run_hour * 3600;
  auto next_action = script_.actions.begin();
  for (int day = 1; day <= script_.days; ++day) {
    steps_.push_back({++n, Step::Kind::open_day, day, 0});
    for (const auto& u : script_.users) {
      const ModeSpan* today = nullptr;
      const ModeSpan* yesterday = nullptr;
      for (const auto& m : script_.modes) {
        if (m.user != u.id) continue;
        if (m.from <= day && day <= m.to) today = &m;
        if (m.from <= day - 1 && day - 1 <= m.to) yesterday = &m;
      }
      if (day > 1 && today && yesterday && today->mode != yesterday->mode)
        steps_.push_back({++n, Step::Kind::switch_mode, day, 0, &u, today});
    }
    bool planned = false;
    for (; next_action != script_.actions.end() && next_action->day == day; ++next_action) {
      if (!planned && next_action->second_of_day >= planner_second) {
        steps_.push_back({++n, Step::Kind::planner, day, planner_second});
        planned = true;
      }
      for (int i = 0; i < next_action->action.count; ++i)
        steps_.push_back({++n, Step::Kind::action, day, next_action->second_of_day, nullptr, nullptr, &*next_action, i});
    }
    if (!planned) steps_.push_back({++n, Step::Kind::planner, day, planner_second});
    steps_.push_back({++n, Step::Kind::close_day, day, kSecondsPerDay - 1});
  }
}

Timestamp Runner::time_of(const Step& s) const {
  if (s.kind == Step::Kind::register_user) return config_.epoch;
  return config_.day_start(s.day) + std::chrono::seconds(s.second);
}

std::unique_ptr<Garden> Runner::start() {
  if (options_.resume) {
    if (!options_.log_path) throw Error(ErrorCode::kInvalidArgument, "resume needs a log path");
    auto contents = field::read_log_file(*options_.log_path);
    if (!contents.intact()) std::filesystem::resize_file(*options_.log_path, contents.valid_bytes);
    auto log = std::make_unique<field::EventLog>(field::EventLog::open(*options_.log_path, false));
    auto g = Garden::restore(contents, std::move(log), {.recover_prefix = true});
    if (options_.sink) g->attach_sink(options_.sink);
    return g;
  }
  std::unique_ptr<field::EventLog> log;
  if (options_.log_path) {
    log = std::make_unique<field::EventLog>(field::EventLog::open(*options_.log_path, true));
  } else {
    log = std::make_unique<field::EventLog>();
  }
  auto g = std::make_unique<Garden>(config_, std::move(log));
  if (options_.sink) g->attach_sink(options_.sink);
  return g;
}

void Runner::drive(Garden& g) {
  g.clock().set_acceleration(script_.acceleration);
  g.clock().set_pacing(options_.paced);
  for (const auto id : options_.interrupt) g.inject_interrupt(id);

  const auto done = g.read([](const garden::GardenState& s) { return s.last_script_step; });
  std::int64_t prev = 0;
  for (const auto& s : steps_) {
    if (s.n <= done) {
      prev = s.n;
      continue;
    }
    const auto t = time_of(s);
    g.set_script_step(prev);
    g.run_until(t);
    g.advance_clock(t);
    g.set_script_step(s.n);
    perform(g, s);
    prev = s.n;
  }
  g.set_script_step(prev);
  g.run_until(Timestamp::max());
  g.set_script_step(std::nullopt);
  g.checkpoint();
}

void Runner::perform(Garden& g, const Step& s) {
  switch (s.kind) {
    case Step::Kind::register_user: {
      const auto& u = *s.user;
      policy::ControlMode mode = policy::ControlMode::manual;
      for (const auto& m : script_.modes)
        if (m.user == u.id && m.from <= 1 && 1 <= m.to) mode = m.mode;
      g.register_user(u.id, u.name, u.plot, "", mode);
      return;
    }
    case Step::Kind::open_day:
      g.open_day(s.day, sched::summarize_day(*weather_, config_.day_start(s.day)));
      return;
    case Step::Kind::switch_mode:
      g.switch_mode(s.user->id, s.span->mode);
      return;
    case Step::Kind::planner:
      g.run_planner(s.day, weather_->current(time_of(s)));
      return;
    case Step::Kind::close_day:
      g.close_day(s.day);
      return;
    case Step::Kind::action:
      break;
  }

  const auto& a = s.action->action;
  try {
    switch (a.verb) {
      case Verb::login:
        g.record_login(a.user);
        break;
      case Verb::logout:
        g.record_logout(a.user, "logout");
        break;
      case Verb::sow:
        g.submit(a.user, tasks::Sow{a.species, a.at});
        break;
      case Verb::water_all: {
        const auto plot = g.read([&](const garden::GardenState& st) { return st.plot_of(a.user).value_or(-1); });
        g.submit(a.user, tasks::Water{{}, plot});
        break;
      }
      case Verb::weed:
        g.submit(a.user, tasks::Weed{*a.at});
        break;
      case Verb::scan:
        g.submit(a.user, tasks::Scan{a.plot});
        break;
      case Verb::moisture:
        g.submit(a.user, tasks::MoistureRead{*a.at});
        break;
      case Verb::chat:
        g.post_chat(a.user, a.text);
        break;
      case Verb::feedback:
        g.post_feedback(a.user, a.text);
        break;
      case Verb::weeds: {
        const auto plot = g.read([&](const garden::GardenState& st) { return st.field.plot(*a.plot); });
        std::mt19937_64 rng(mix(script_.seed, static_cast<std::uint64_t>(s.n)));
        const int margin = 20;
        std::uniform_int_distribution<int> d(margin, plot.size_mm - margin);
        const int x = d(rng);
        const int y = d(rng);
        g.add_weed(plot.id, {plot.origin.x_mm + x, plot.origin.y_mm + y});
        break;
      }
    }
  } catch (const Error&) {
    // Rejections are already on the log; the script keeps going.
    ++action_errors_;
  }
}

MetricsReport Runner::run() {
  auto g = start();
  drive(*g);
  return compute_metrics(script_, g->snapshot(), config_, action_errors_);
}

MetricsReport compute_metrics(const Script& script, const garden::GardenState& st, const garden::GardenConfig& config,
                              int action_errors) {
  MetricsReport r;
  r.scenario = script.name;
  r.days = script.days;
  r.seed = script.seed;
  r.action_errors = action_errors;

  for (const auto& p : st.field.plots) r.per_plot[p.id];
  for (const auto& [id, p] : st.field.plants) {
    auto& pc = r.per_plot[p.plot_id];
    ++pc.sown;
    ++r.plants_sown;
    if (p.live()) ++pc.live;
    if (p.state == field::PlantState::germinated || p.state == field::PlantState::growing) {
      ++pc.germinated;
      ++r.plants_germinated;
    }
  }
  r.germination_rate = field::germination_rate(st.field);

  std::vector<double> waits;
  for (const auto& [id, e] : st.queue.entries()) {
    ++r.tasks_by_kind_and_mode[tasks::kind_name(e.task.kind)][e.mode];
    ++r.tasks_by_state[std::string(sched::to_string(e.state))];
    if (e.result.started_at) waits.push_back(to_seconds(*e.result.started_at - e.enqueued_at));
  }
  r.queue_wait.count = static_cast<std::int64_t>(waits.size());
  if (!waits.empty()) {
    double sum = 0.0;
    for (const double w : waits) sum += w;
    r.queue_wait.mean_s = sum / static_cast<double>(waits.size());
    r.queue_wait.p50_s = percentile(waits, 0.5);
    r.queue_wait.p95_s = percentile(waits, 0.95);
    r.queue_wait.max_s = *std::max_element(waits.begin(), waits.end());
  }
  r.rejections = st.rejections;

  for (const auto& [user, days] : policy::mode_day_matrix(st.modes, config.epoch, script.days)) {
    std::string row;
    for (const auto m : days) row += policy::mode_letter(m);
    r.mode_day_matrix[user] = row;
  }

  r.logins_by_day.assign(static_cast<std::size_t>(script.days), 0);
  for (const auto& e : st.timeline.events()) {
    ++r.timeline_events;
    if (e.kind == field::EventKind::sow && e.status == "done") ++r.sow_events;
    if (e.kind == field::EventKind::login) {
      ++r.logins;
      const auto day = static_cast<int>((e.timestamp - config.epoch) / std::chrono::seconds(kSecondsPerDay));
      if (day >= 0 && day < script.days) ++r.logins_by_day[static_cast<std::size_t>(day)];
    }
  }
  r.frames = static_cast<int>(st.frames.size());
  r.chat_messages = static_cast<int>(st.chat.size());

  std::map<field::PlantId, double> last_radius;
  for (const auto& f : st.frames) {
    for (const auto& p : f.plants) {
      auto [it, fresh] = last_radius.emplace(p.id, p.radius_mm);
      if (!fresh) {
        if (p.radius_mm < it->second) r.radii_nondecreasing = false;
        it->second = p.radius_mm;
      }
    }
  }
  return r;
}

json to_json(const MetricsReport& r) {
  json plots = json::object();
  for (const auto& [id, c] : r.per_plot)
    plots[std::to_string(id)] = {{"sown", c.sown}, {"live", c.live}, {"germinated", c.germinated}};
  return {{"scenario", r.scenario},
          {"days", r.days},
          {"seed", r.seed},
          {"plants_sown", r.plants_sown},
          {"plants_germinated", r.plants_germinated},
          {"germination_rate", r.germination_rate},
          {"radii_nondecreasing", r.radii_nondecreasing},
          {"tasks_by_kind_and_mode", r.tasks_by_kind_and_mode},
          {"tasks_by_state", r.tasks_by_state},
          {"rejections", r.rejections},
          {"queue_wait_stats",
           {{"count", r.queue_wait.count},
            {"mean_s", r.queue_wait.mean_s},
            {"p50_s", r.queue_wait.p50_s},
            {"p95_s", r.queue_wait.p95_s},
            {"max_s", r.queue_wait.max_s}}},
          {"mode_day_matrix", r.mode_day_matrix},
          {"per_plot", plots},
          {"sow_events", r.sow_events},
          {"frames", r.frames},
          {"logins", r.logins},
          {"logins_by_day", r.logins_by_day},
          {"timeline_events", r.timeline_events},
          {"chat_messages", r.chat_messages},
          {"action_errors", r.action_errors}};
}

std::string summary_table(const MetricsReport& r) {
  std::string out;
  out += fmt::format("scenario {}  days {}  seed {}\n", r.scenario, r.days, r.seed);
  out += fmt::format("plants sown {}  germinated {}  rate {:.2f}%\n", r.plants_sown, r.plants_germinated,
                     100.0 * r.germination_rate);
  out += fmt::format("sow events {}  frames {}  logins {}  chat {}\n", r.sow_events, r.frames, r.logins,
                     r.chat_messages);
  out += fmt::format("queue wait  n={}  mean {:.1f}s  p50 {:.1f}s  p95 {:.1f}s  max {:.1f}s\n", r.queue_wait.count,
                     r.queue_wait.mean_s, r.queue_wait.p50_s, r.queue_wait.p95_s, r.queue_wait.max_s);
  out += "\n";
  std::set<std::string> modes;
  for (const auto& [k, m] : r.tasks_by_kind_and_mode)
    for (const auto& [mode, n] : m) modes.insert(mode);
  out += fmt::format("{:<14}", "task");
  for (const auto& m : modes) out += fmt::format("{:>10}", m);
  out += "\n";
  for (const auto& [k, m] : r.tasks_by_kind_and_mode) {
    out += fmt::format("{:<14}", k);
    for (const auto& mode : modes) out += fmt::format("{:>10}", m.contains(mode) ? m.at(mode) : 0);
    out += "\n";
  }
  if (!r.rejections.empty()) {
    out += "\nrejections:";
    for (const auto& [k, n] : r.rejections) out += fmt::format(" {}={}", k, n);
    out += "\n";
  }
  out += "\nmode by day\n";
  for (const auto& [u, row] : r.mode_day_matrix) out += fmt::format("  {:<10} {}\n", u, row);
  out += "\nplot  sown  live  germinated\n";
  for (const auto& [id, c] : r.per_plot) out += fmt::format("{:>4}  {:>4}  {:>4}  {:>10}\n", id, c.sown, c.live, c.germinated);
  return out;
}

}  // namespace plotbot::scenario

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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// fails. Tolerances and sizes are fixed here on purpose.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "oracles.hpp"
#include "plotbot/api/service.hpp"
#include "plotbot/api/stream.hpp"
#include "plotbot/gantry/simulator.hpp"
#include "plotbot/scenario/runner.hpp"
#include "workload.hpp"

using namespace plotbot;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFcfsSubmissions = 1000;
constexpr int kFcfsSessions = 18;
constexpr double kFcfsBudgetS = 10.0;
constexpr int kPolicyMinSowWater = 500;
constexpr int kPolicyCases = 2500;
constexpr int kPlannerCases = 600;
constexpr int kGantrySequences = 10000;
constexpr int kGantrySteps = 40;
constexpr double kDurationTol = 1e-9;
constexpr int kCanonicalSows = 250;
constexpr int kCanonicalDays = 21;
constexpr double kStochasticLo = 0.70;
constexpr double kStochasticHi = 0.90;
constexpr double kCanonicalBudgetS = 60.0;
constexpr int kCrashRandomCuts = 16;
constexpr int kCrashExecutionCuts = 8;
constexpr int kStreamCheckpoints = 50;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path scenarios() { return fs::path(PLOTBOT_SOURCE_DIR) / "scenarios"; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

scenario::Script load(const std::string& name) {
  auto r = scenario::load_script(scenarios() / name);
  if (!r.ok()) throw std::runtime_error(fmt::format("{}: {}", name, r.diagnostics.front().message));
  return r.script;
}

// --- FCFS -------------------------------------------------------------------

Outcome fcfs() {
  const auto t0 = Clock::now();
  garden::GardenConfig cfg;
  cfg.queue_capacity = 2 * kFcfsSubmissions;
  garden::Garden g(cfg, std::make_unique<field::EventLog>());
  api::StreamHub hub;
  g.attach_sink(&hub);
  auto weather = std::make_shared<sched::WeatherService>(std::make_shared<sched::StubExternalWeather>(1));
  api::ApiService service(g, hub, weather);
  const auto hash = api::hash_password("pw", api::HashCost::minimum());
  std::vector<std::string> tokens;
  for (int i = 0; i < kFcfsSessions; ++i) {
    const auto id = fmt::format("s{:02}", i);
    g.register_user(id, id, i, hash, static_cast<policy::ControlMode>(i % 2));
    const auto r = service.handle({"POST", "/api/v1/login", {}, "", json{{"user_id", id}, {"password", "pw"}}.dump()});
    tokens.push_back(r.body.at("token").get<std::string>());
  }

  std::atomic<bool> submitting{true};
  std::vector<tasks::TaskId> executed;
  std::thread worker([&] {
    for (;;) {
      try {
        executed.push_back(g.run_next().task.id);
      } catch (const Error&) {
        if (!submitting) break;
        std::this_thread::yield();
      }
    }
  });

  std::vector<std::vector<tasks::TaskId>> per_session(kFcfsSessions);
  std::atomic<int> refused{0};
  std::vector<std::thread> threads;
  for (int s = 0; s < kFcfsSessions; ++s) {
    threads.emplace_back([&, s] {
      testgen::Rng rng(static_cast<std::uint64_t>(100 + s));
      const int n = kFcfsSubmissions / kFcfsSessions + (s < kFcfsSubmissions % kFcfsSessions ? 1 : 0);
      const int ox = (s % 6) * 1000, oy = (s / 6) * 1000;
      for (int i = 0; i < n; ++i) {
        json body = rng.coin(0.5) ? json{{"kind", "moisture_read"}, {"target", json::array({ox + rng.range(0, 999), oy + rng.range(0, 999)})}}
                                  : json{{"kind", "scan"}, {"plot", s}};
        const auto r = service.handle({"POST", "/api/v1/tasks", {}, tokens[static_cast<std::size_t>(s)], body.dump()});
        if (r.status != 201) {
          ++refused;
          continue;
        }
        per_session[static_cast<std::size_t>(s)].push_back(r.body.at("task").at("id").get<tasks::TaskId>());
        if (rng.coin(0.2)) std::this_thread::yield();
      }
    });
  }
  for (auto& t : threads) t.join();
  submitting = false;
  worker.join();
  while (true) {  // anything the worker left behind
    try {
      executed.push_back(g.run_next().task.id);
    } catch (const Error&) {
      break;
    }
  }

  const auto st = g.snapshot();
  std::vector<sched::QueueEntry> entries;
  for (const auto& [id, e] : st.queue.entries()) entries.push_back(e);
  auto oracle = entries;
  std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
    return std::tie(a.enqueued_at, a.task.id) < std::tie(b.enqueued_at, b.task.id);
  });
  std::vector<tasks::TaskId> want;
  for (const auto& e : oracle) want.push_back(e.task.id);
  bool session_fifo = true;
  for (const auto& ids : per_session) session_fifo &= std::is_sorted(ids.begin(), ids.end());
  const auto pending = std::count_if(entries.begin(), entries.end(), [](const auto& e) {
    return e.state == sched::EntryState::pending || e.state == sched::EntryState::executing;
  });
  bool started_monotone = true;
  for (std::size_t i = 1; i < oracle.size(); ++i)
    started_monotone &= oracle[i - 1].result.started_at <= oracle[i].result.started_at;
  const double wall = since(t0);
  const bool pass = refused == 0 && entries.size() == static_cast<std::size_t>(kFcfsSubmissions) &&
                    executed == want && session_fifo && pending == 0 && started_monotone && wall < kFcfsBudgetS;
  return {pass, fmt::format("{} submitted, {} refused, {} executed, order {}, starved {}, {:.2f}s", entries.size(),
                            refused.load(), executed.size(), executed == want ? "exact" : "WRONG", pending, wall)};
}

// --- mode semantics -----------------------------------------------------------

Outcome mode_semantics() {
  const auto species = policy::SpeciesCatalog::defaults();
  testgen::Rng rng(4242);
  int sow_water = 0, disagreements = 0, manual_soft = 0, hybrid_rejects = 0;
  for (int i = 0; i < kPolicyCases; ++i) {
    const auto c = oracle::random_policy_case(rng, species);
    const bool sw = std::holds_alternative<tasks::Sow>(c.task.kind) || std::holds_alternative<tasks::Water>(c.task.kind);
    if (!sw) continue;
    ++sow_water;
    if (!oracle::check_policy_case(c, species).empty()) ++disagreements;
    try {
      const auto v = policy::validate(c.task, c.mode, {c.field, species, c.plot, c.now, {}});
      if (c.mode == policy::ControlMode::manual && !v.findings.empty()) {
        ++manual_soft;
        if (v.verdict == policy::Verdict::rejected) ++disagreements;
      }
      hybrid_rejects += c.mode == policy::ControlMode::hybrid && v.verdict == policy::Verdict::rejected;
    } catch (const Error&) {
    }
  }
  int planner_bad = 0, rainy = 0;
  for (int i = 0; i < kPlannerCases; ++i) {
    const auto c = oracle::random_planner_case(rng, species);
    rainy += c.raining;
    if (!oracle::check_planner_case(c.field, c.users, species, c.raining).empty()) ++planner_bad;
  }
  const bool pass = sow_water >= kPolicyMinSowWater && disagreements == 0 && planner_bad == 0 && manual_soft > 0 &&
                    hybrid_rejects > 0;
  return {pass, fmt::format("{} sow/water tasks ({} manual soft, {} hybrid rejects), {} disagreements; "
                            "{} planner days ({} rainy), {} disagreements",
                            sow_water, manual_soft, hybrid_rejects, disagreements, kPlannerCases, rainy, planner_bad)};
}

// --- gantry ------------------------------------------------------------------

double formula(const Coord3& a, const Coord3& b, const gantry::AxisSpeeds& v) {
  return std::max({std::abs(b.x_mm - a.x_mm) / v.x_mm_per_s, std::abs(b.y_mm - a.y_mm) / v.y_mm_per_s,
                   std::abs(b.z_mm - a.z_mm) / v.z_mm_per_s});
}

Outcome gantry_sm() {
  using namespace plotbot::gantry;
  const auto c = FieldConfig::defaults();
  const std::vector<Tool> tools(std::begin(kAllTools), std::end(kAllTools));
  const std::vector<std::string> species{"radish", "lettuce", "cumin", "marigold"};
  std::int64_t steps = 0, moves = 0, actuations = 0, violations = 0;
  double worst = 0.0;
  for (int seq = 0; seq < kGantrySequences; ++seq) {
    testgen::Rng rng(static_cast<std::uint64_t>(seq) * 7919 + 1);
    Simulator sim(c);
    SoilGrid soil(c.width_mm, c.depth_mm, c.moisture.cell_mm, c.moisture.initial);
    for (int k = 0; k < kGantrySteps; ++k, ++steps) {
      const auto before = sim.state();
      const auto bay_before = sim.tool_bay();
      const int op = static_cast<int>(rng.range(0, 7));
      bool ok = true;
      try {
        switch (op) {
          case 0:
          case 1: {
            const auto target = rng.coord3(c.width_mm + 40, c.depth_mm + 40, c.z_max_mm + 40);
            const auto plan = sim.move_to(target);
            const double want = formula(before.position, target, c.axis_speed);
            worst = std::max(worst, std::abs(plan.duration_s - want));
            if (std::abs(plan.duration_s - want) > kDurationTol) ++violations;
            const auto dt = sim.state().sim_clock - before.sim_clock;
            if (std::abs(dt.count() - std::llround(want * 1e6)) > 1) ++violations;
            ++moves;
            break;
          }
          case 2:
            sim.mount_tool(rng.pick(tools));
            break;
          case 3:
            sim.unmount_tool();
            break;
          case 4:
            if (rng.coin()) sim.move_to(c.seed_containers.at(rng.pick(species)));
            sim.actuate(VacuumPick{rng.pick(species)}, soil);
            break;
          default: {
            const Action acts[] = {DispenseWater{static_cast<double>(rng.range(1, 150))}, VacuumRelease{},
                                   RotarySpin{static_cast<double>(rng.range(1, 5))}, CaptureImage{}, ReadMoisture{}};
            const auto a = acts[rng.range(0, 4)];
            sim.actuate(a, soil);
            ++actuations;
            // mount-before-actuate: a successful actuation had its tool on
            const auto need = required_tool(a);
            if (need != Tool::none && before.mounted_tool != need) ++violations;
          }
        }
      } catch (const Error&) {
        ok = false;
      }
      const auto& s = sim.state();
      if (!c.in_bounds(s.position) || s.busy) ++violations;
      const std::size_t mounted = s.mounted_tool == Tool::none ? 0 : 1;
      if (sim.tool_bay().size() + mounted != 5) ++violations;
      if (mounted && sim.in_bay(s.mounted_tool)) ++violations;
      // A refused move or mount leaves position and tools alone.
      if (!ok && op <= 3 && (s.position != before.position || s.mounted_tool != before.mounted_tool ||
                             sim.tool_bay() != bay_before))
        ++violations;
    }
  }
  return {violations == 0, fmt::format("{} sequences, {} steps, {} moves, {} actuations, {} violations, "
                                       "max duration error {:.1e}s",
                                       kGantrySequences, steps, moves, actuations, violations, worst)};
}

// --- canonical scenario -------------------------------------------------------

std::map<std::string, std::string> schedule_matrix(const scenario::Script& s) {
  std::map<std::string, std::string> m;
  for (const auto& u : s.users) m[u.id] = std::string(static_cast<std::size_t>(s.days), '?');
  for (const auto& span : s.modes)
    for (int d = span.from; d <= span.to; ++d)
      m[span.user][static_cast<std::size_t>(d - 1)] = static_cast<char>(std::toupper(policy::to_string(span.mode)[0]));
  return m;
}

Outcome canonical() {
  const auto script = load("canonical.scn");
  int sows = 0;
  for (const auto& a : script.actions)
    if (a.action.verb == scenario::Verb::sow) sows += a.action.count;
  std::map<char, int> split;
  for (const auto& [user, row] : schedule_matrix(script)) ++split[row[0]];

  // Rain only in weeks 2 and 3.
  bool rain_ok = script.weather_trace.has_value();
  int rain_hours = 0;
  if (rain_ok) {
    std::istringstream in(read_file(script.resolve(*script.weather_trace)));
    const auto trace = sched::parse_weather_trace(in);
    const auto epoch = garden::GardenConfig{}.epoch;
    for (const auto& w : trace)
      if (w.raining) {
        ++rain_hours;
        const auto day = std::chrono::floor<std::chrono::days>(w.timestamp - epoch).count() + 1;
        rain_ok &= day >= 8 && day <= kCanonicalDays;
      }
    rain_ok &= rain_hours > 0;
  }

  const auto t0 = Clock::now();
  scenario::RunOptions paced;
  paced.paced = true;
  const auto r = scenario::Runner(script, paced).run();
  const double wall = since(t0);
  const auto again = scenario::Runner(script).run();
  const bool deterministic = to_json(r).dump() == to_json(again).dump();

  const auto stochastic = scenario::Runner(load("canonical_stochastic.scn")).run();
  const double sg = stochastic.germination_rate;

  const bool pass = script.users.size() == 18 && sows == kCanonicalSows && split['A'] == 5 && split['M'] == 3 &&
                    split['H'] == 10 && rain_ok && deterministic && r.sow_events == kCanonicalSows &&
                    r.plants_sown == kCanonicalSows && r.frames == kCanonicalDays && r.radii_nondecreasing &&
                    r.mode_day_matrix == schedule_matrix(script) && r.germination_rate == 1.0 &&
                    sg >= kStochasticLo && sg <= kStochasticHi && script.acceleration == 10000 &&
                    wall < kCanonicalBudgetS;
  return {pass, fmt::format("{} users {}A/{}M/{}H, {} sow events, {} frames, radii {}, matrix {}, rain hours {} {}, "
                            "germination {:.1f}%, stochastic {:.1f}%, deterministic {}, {:.1f}s at {}x",
                            script.users.size(), split['A'], split['M'], split['H'], r.sow_events, r.frames,
                            r.radii_nondecreasing ? "nondecreasing" : "SHRANK",
                            r.mode_day_matrix == schedule_matrix(script) ? "matches" : "DIFFERS", rain_hours,
                            rain_ok ? "in weeks 2-3" : "MISPLACED", 100 * r.germination_rate, 100 * sg,
                            deterministic ? "yes" : "NO", wall, script.acceleration)};
}

// --- crash injection ------------------------------------------------------------

std::optional<tasks::TaskId> open_execution(const std::vector<json>& records) {
  std::optional<tasks::TaskId> open;
  for (const auto& r : records) {
    const auto type = r.at("type").get<std::string>();
    if (type == "execution_started") open = r.at("task_id").get<tasks::TaskId>();
    if (type == "execution_finished" || type == "execution_interrupted") open.reset();
  }
  return open;
}

bool timeline_clean(const garden::GardenState& s) {
  std::set<std::int64_t> ids;
  for (const auto& e : s.timeline.events())
    if (!ids.insert(e.id).second) return false;
  return true;
}

Outcome crash_injection() {
  const auto dir = fs::temp_directory_path() / "plotbot_acceptance_crash";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto script = load("canonical.scn");

  scenario::RunOptions full_opts;
  full_opts.log_path = dir / "full.log";
  scenario::Runner full(script, full_opts);
  auto fg = full.start();
  full.drive(*fg);
  const auto expected = fg->snapshot();
  fg.reset();
  const auto bytes = read_file(*full_opts.log_path);
  const auto records = field::parse_log(bytes).records;
  const auto ends = field::EventLog::from_bytes(bytes).boundaries();

  testgen::Rng rng(31337);
  std::vector<std::size_t> cuts;
  for (int i = 0; i < kCrashRandomCuts; ++i)
    cuts.push_back(static_cast<std::size_t>(rng.range(64, static_cast<std::int64_t>(bytes.size()) - 1)));
  std::vector<std::size_t> started;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].at("type") == "execution_started") started.push_back(i);
  for (int i = 0; i < kCrashExecutionCuts; ++i) {
    const auto idx = started[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(started.size()) - 1))];
    cuts.push_back(ends[idx] + static_cast<std::size_t>(rng.range(0, 7)));
  }

  int equal = 0, mid = 0, clean = 0;
  std::vector<std::string> failures;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const auto path = dir / fmt::format("cut{}.log", k);
    std::ofstream(path, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(cuts[k]));
    const auto open = open_execution(field::parse_log(bytes.substr(0, cuts[k])).records);

    scenario::RunOptions ro;
    ro.log_path = path;
    ro.resume = true;
    scenario::Runner resumed(script, ro);
    auto g = resumed.start();
    resumed.drive(*g);
    const auto got = g->snapshot();
    g.reset();

    garden::GardenState want = expected;
    if (open) {
      ++mid;
      scenario::RunOptions refo;
      refo.interrupt = {*open};
      scenario::Runner ref(script, refo);
      auto rg = ref.start();
      ref.drive(*rg);
      want = rg->snapshot();
    }
    const bool same = got == want && got.timeline.events() == want.timeline.events();
    equal += same;
    const bool tl = timeline_clean(got);
    clean += tl;
    const auto replay = garden::Garden::restore(field::read_log_file(path))->snapshot();
    if (!same || !tl || !(replay == got)) failures.push_back(fmt::format("cut {}", cuts[k]));
  }
  const int n = static_cast<int>(cuts.size());
  return {failures.empty() && mid >= kCrashExecutionCuts,
          fmt::format("{} cuts ({} inside an execution), {} equal final state, {} clean timelines{}", n, mid, equal,
                      clean, failures.empty() ? "" : ", failed: " + fmt::format("{}", fmt::join(failures, " ")))};
}

// --- stream / poll ------------------------------------------------------------------

Outcome stream_poll() {
  garden::Garden g(garden::GardenConfig{}, std::make_unique<field::EventLog>());
  api::StreamHub hub(1 << 20, 1 << 20);
  g.attach_sink(&hub);
  testgen::Workload w(g, 808);
  api::StreamMirror mirror(api::live_document(g.snapshot(), hub.last_seq()));
  auto sub = hub.subscribe({}, mirror.cursor());
  testgen::Rng rng(99);
  int reconnects = 0;
  int checks = 0, equal = 0;
  std::int64_t events = 0;
  while (checks < kStreamCheckpoints) {
    if (checks % 5 == 0) w.next_day();
    for (int i = rng.range(1, 40); i > 0; --i) w.step();
    w.settle();
    const auto batch = sub->drain();
    events += static_cast<std::int64_t>(batch.size());
    for (const auto& e : batch) mirror.apply(e);
    equal += mirror.document() == api::live_document(g.snapshot(), hub.last_seq());
    ++checks;
    if (rng.coin(0.3)) {  // reconnect from the cursor
      sub = hub.subscribe({}, mirror.cursor());
      ++reconnects;
    }
  }
  const auto s = g.snapshot();
  return {equal == checks && s.field.plants.size() > 5,
          fmt::format("{} checkpoints, {} equal, {} events folded, {} reconnects, {} plants", checks, equal,
                      events, reconnects, s.field.plants.size())};
}

// --- auto_place ------------------------------------------------------------------

Outcome auto_place_grid() {
  const auto cfg = scenario::garden_config_for(load("canonical.scn"));
  const field::FieldState base(cfg.field);
  int checked = 0, bad = 0;
  std::vector<std::string> notes;
  for (const auto& id : cfg.species.ids()) {
    const auto& sp = cfg.species.at(id);
    const int r = sp.spread_radius_mm;
    const int per_axis = (1000 - 2 * r) / (2 * r) + 1;  // closed form
    const int cap = per_axis * per_axis;
    for (const int plot_id : {0, 7, 17}) {
      const auto& plot = base.plot(plot_id);
      for (int n = 1; n <= cap + 1; ++n) {
        ++checked;
        try {
          const auto spots = policy::auto_place(sp, n, plot, {});
          if (n > cap || static_cast<int>(spots.size()) != n) {
            ++bad;
            continue;
          }
          field::FieldState f = base;
          for (std::size_t k = 0; k < spots.size(); ++k) {
            const int gx = static_cast<int>(k) % per_axis, gy = static_cast<int>(k) / per_axis;
            const Coord2 want{plot.origin.x_mm + r + 2 * r * gx, plot.origin.y_mm + r + 2 * r * gy};
            tasks::TaskRequest t;
            t.user_id = "u";
            t.kind = tasks::Sow{id, spots[k]};
            const auto v = policy::validate(t, policy::ControlMode::hybrid, {f, cfg.species, plot_id, Timestamp{}, {}});
            if (spots[k] != want || v.verdict != policy::Verdict::ok) ++bad;
            field::Plant p;
            p.plot_id = plot_id;
            p.owner = "u";
            p.species_id = id;
            p.position = spots[k];
            f.add_plant(p);
          }
        } catch (const Error& e) {
          if (n <= cap || e.code() != ErrorCode::kPlacementExhausted) ++bad;
        }
      }
    }
    notes.push_back(fmt::format("{} {}", id, cap));
  }
  return {bad == 0 && checked > 0,
          fmt::format("{} placements checked, {} wrong; capacity {}", checked, bad, fmt::join(notes, ", "))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"fcfs-order", fcfs},
      {"mode-semantics", mode_semantics},
      {"gantry-state-machine", gantry_sm},
      {"canonical-scenario", canonical},
      {"crash-restore", crash_injection},
      {"stream-poll-equivalence", stream_poll},
      {"auto-place-grid", auto_place_grid},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failed += !o.pass;
    fmt::print("{} {:<24} {} [{:.1f}s]\n", o.pass ? "PASS" : "FAIL", name, o.detail, since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

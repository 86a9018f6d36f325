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

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "plotbot/api/accounts.hpp"
#include "plotbot/api/http_server.hpp"
#include "plotbot/api/service.hpp"
#include "plotbot/api/stream.hpp"
#include "plotbot/error.hpp"
#include "plotbot/garden/garden.hpp"
#include "plotbot/scenario/runner.hpp"
#include "plotbot/scenario/script.hpp"

namespace fs = std::filesystem;
using namespace plotbot;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitScript = 1;
constexpr int kExitRuntime = 2;

std::atomic<api::HttpServer*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

bool print_diagnostics(const fs::path& path, const std::vector<scenario::Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << scenario::format_diagnostic(path.string(), d) << "\n";
  return diags.empty();
}

std::optional<scenario::Script> load_checked(const fs::path& path) {
  auto parsed = scenario::load_script(path);
  if (!print_diagnostics(path, parsed.diagnostics)) return std::nullopt;
  if (!print_diagnostics(path, scenario::validate_script(parsed.script))) return std::nullopt;
  return std::move(parsed.script);
}

struct RunArgs {
  std::string script;
  std::optional<std::uint64_t> seed;
  std::optional<double> acceleration;
  std::string out = "out";
  bool resume = false;
  bool paced = false;
};

int cmd_run(const RunArgs& a) {
  auto script = load_checked(a.script);
  if (!script) return kExitScript;
  fs::create_directories(a.out);
  scenario::RunOptions opt;
  opt.log_path = fs::path(a.out) / "events.log";
  opt.resume = a.resume;
  opt.paced = a.paced;
  opt.seed = a.seed;
  opt.acceleration = a.acceleration;
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = scenario::Runner(std::move(*script), opt).run();
  const auto wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ofstream(fs::path(a.out) / "report.json") << scenario::to_json(report).dump(2) << "\n";
  const auto table = scenario::summary_table(report);
  std::ofstream(fs::path(a.out) / "summary.txt") << table;
  std::cout << table << fmt::format("\nwall {:.2f}s, report in {}\n", wall, a.out);
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  if (!load_checked(path)) return kExitScript;
  std::cout << path << ": ok\n";
  return kExitOk;
}

struct ServeArgs {
  std::string users;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string log = "plotbot.log";
  std::string weather = "stub";
  double rain = 0.2;
  std::uint64_t seed = 1;
  double session_ttl_h = 8.0;
  double acceleration = 60.0;
  std::string static_dir;
};

// Advances the garden in virtual time: opens and closes days, runs the
// planner at its hour and executes the queue.
void tick(garden::Garden& g, sched::WeatherProvider& weather, Timestamp target) {
  const auto& cfg = g.config();
  for (;;) {
    const auto [day, open, now] = g.read([](const garden::GardenState& s) { return std::tuple{s.day, s.day_open, s.now}; });
    if (open) {
      const auto planner_at = cfg.day_start(day) + std::chrono::hours(cfg.planner.run_hour);
      const auto day_end = cfg.day_start(day + 1) - std::chrono::seconds(1);
      if (now < planner_at && target >= planner_at) {
        g.run_until(planner_at);
        g.advance_clock(planner_at);
        try {
          g.run_planner(day, weather.current(planner_at));
        } catch (const Error& e) {
          std::cerr << "planner: " << e.what() << "\n";
        }
        continue;
      }
      if (target < day_end) {
        g.run_until(target);
        g.advance_clock(target);
        return;
      }
      g.run_until(day_end);
      g.advance_clock(day_end);
      g.close_day(day);
      continue;
    }
    const auto next = cfg.day_start(day + 1);
    if (target < next) {
      g.advance_clock(target);
      return;
    }
    g.advance_clock(next);
    sched::DayWeather dw;
    try {
      dw = sched::summarize_day(weather, next);
    } catch (const Error&) {
    }
    g.open_day(day + 1, dw);
  }
}

int cmd_serve(const ServeArgs& a) {
  std::ifstream in(a.users);
  if (!in) {
    std::cerr << "cannot open users file " << a.users << "\n";
    return kExitScript;
  }
  const auto users = nlohmann::json::parse(in);

  garden::GardenConfig cfg;
  std::unique_ptr<garden::Garden> g;
  if (fs::exists(a.log) && fs::file_size(a.log) > 0) {
    auto contents = field::read_log_file(a.log);
    if (!contents.intact()) {
      std::cerr << "log tail damaged, truncating to " << contents.valid_bytes << " bytes\n";
      fs::resize_file(a.log, contents.valid_bytes);
    }
    g = garden::Garden::restore(contents, std::make_unique<field::EventLog>(field::EventLog::open(a.log, false)),
                                {.recover_prefix = true});
  } else {
    g = std::make_unique<garden::Garden>(cfg, std::make_unique<field::EventLog>(field::EventLog::open(a.log, true)));
  }
  for (const auto& u : users) {
    const auto id = u.at("id").get<std::string>();
    if (g->read([&](const garden::GardenState& s) { return s.user(id) != nullptr; })) continue;
    const auto mode = policy::mode_from_string(u.value("mode", std::string("manual")));
    if (!mode) throw Error(ErrorCode::kInvalidArgument, fmt::format("user {}: unknown mode", id));
    g->register_user(id, u.value("name", id), u.at("plot").get<int>(),
                     api::hash_password(u.at("password").get<std::string>(), api::HashCost::interactive()),
                     *mode);
  }

  std::shared_ptr<sched::WeatherProvider> provider;
  if (a.weather == "stub") {
    provider = std::make_shared<sched::StubExternalWeather>(a.seed, a.rain);
  } else {
    provider = std::make_shared<sched::TraceWeatherProvider>(sched::load_weather_trace(a.weather));
  }
  auto weather = std::make_shared<sched::WeatherService>(provider);

  api::StreamHub hub;
  g->attach_sink(&hub);
  api::ApiConfig api_cfg;
  api_cfg.session_ttl = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::duration<double, std::ratio<3600>>(a.session_ttl_h));
  api::ApiService service(*g, hub, weather, api_cfg);
  api::HttpServer server(service, {a.host, a.port, std::chrono::milliseconds(15000), a.static_dir});
  const int port = server.bind();
  std::cout << fmt::format("listening on http://{}:{}\n", a.host, port) << std::flush;

  std::atomic<bool> running{true};
  std::thread ticker([&] {
    const auto wall0 = std::chrono::steady_clock::now();
    const auto sim0 = std::max(g->read([](const garden::GardenState& s) { return s.now; }), g->config().epoch);
    while (running) {
      const auto elapsed = std::chrono::steady_clock::now() - wall0;
      const auto sim = sim0 + std::chrono::duration_cast<Duration>(elapsed * a.acceleration);
      try {
        tick(*g, *provider, sim);
      } catch (const Error& e) {
        std::cerr << "ticker: " << e.what() << "\n";
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
  });

  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen();
  running = false;
  ticker.join();
  g->checkpoint();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plotbot: shared garden robot simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "replay a scenario script and write a metrics report");
  run_cmd->add_option("script", run.script, "scenario script")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "override the script seed");
  run_cmd->add_option("--out", run.out, "output directory")->capture_default_str();
  run_cmd->add_option("--acceleration", run.acceleration, "override the time acceleration")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--resume", run.resume, "continue from <out>/events.log");
  run_cmd->add_flag("--paced", run.paced, "sleep robot busy time divided by the acceleration");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "check a scenario script");
  validate_cmd->add_option("script", validate_path, "scenario script")->required()->check(CLI::ExistingFile);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP API over a live garden");
  serve_cmd->add_option("--users", serve.users, "JSON list of {id, name, plot, password, mode}")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", serve.host)->capture_default_str();
  serve_cmd->add_option("--port", serve.port)->capture_default_str();
  serve_cmd->add_option("--log", serve.log, "event log path")->capture_default_str();
  serve_cmd->add_option("--weather", serve.weather, "'stub' or a weather trace file")->capture_default_str();
  serve_cmd->add_option("--rain", serve.rain, "stub rain probability")->capture_default_str();
  serve_cmd->add_option("--seed", serve.seed, "stub weather seed")->capture_default_str();
  serve_cmd->add_option("--session-ttl-hours", serve.session_ttl_h)->capture_default_str();
  serve_cmd->add_option("--acceleration", serve.acceleration, "simulated seconds per wall second")->capture_default_str()->check(CLI::PositiveNumber);
  serve_cmd->add_option("--static", serve.static_dir, "directory of web client files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*validate_cmd) return cmd_validate(validate_path);
    if (*serve_cmd) return cmd_serve(serve);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kScriptInvalid ? kExitScript : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

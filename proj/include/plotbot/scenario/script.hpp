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
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "plotbot/garden/state.hpp"

namespace plotbot::scenario {

struct Diagnostic {
  int line = 0;  // 0: whole script
  std::string message;
  bool operator==(const Diagnostic&) const = default;
};

std::string format_diagnostic(const std::string& source, const Diagnostic& d);

enum class Verb { login, logout, sow, water_all, weed, scan, moisture, chat, feedback, weeds };

std::string_view to_string(Verb v) noexcept;

struct Action {
  Verb verb = Verb::login;
  std::string user;   // empty for `weeds`
  std::string species;
  std::optional<Coord2> at;  // nullopt sow: auto placement
  int count = 1;             // sow xN, weeds N
  std::optional<int> plot;   // scan / weeds
  std::string text;
  bool operator==(const Action&) const = default;
};

struct TimedAction {
  int day = 1;
  int second_of_day = 0;
  Action action;
  int line = 0;
  bool operator==(const TimedAction&) const = default;
};

struct UserSpec {
  std::string id;
  std::string name;
  std::string password;  // empty: no login credential
  int plot = 0;
  int line = 0;
  bool operator==(const UserSpec&) const = default;
};

struct ModeSpan {
  std::string user;
  int from = 1;
  int to = 1;
  policy::ControlMode mode = policy::ControlMode::manual;
  int line = 0;
  bool operator==(const ModeSpan&) const = default;
};

struct Script {
  std::string name = "scenario";
  int days = 0;
  double acceleration = 1.0;
  std::uint64_t seed = 1;
  // Exactly one weather source; neither means a dry stub.
  std::optional<std::filesystem::path> weather_trace;
  std::optional<double> stub_rain_probability;
  garden::MoistureNoise noise;
  std::optional<std::filesystem::path> field_config;
  std::optional<std::filesystem::path> species_config;
  std::vector<UserSpec> users;
  std::vector<ModeSpan> modes;
  std::vector<TimedAction> actions;  // daily templates already expanded
  std::filesystem::path base_dir;    // relative paths resolve here

  std::filesystem::path resolve(const std::filesystem::path& p) const { return p.is_absolute() ? p : base_dir / p; }
};

struct ParseResult {
  Script script;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return diagnostics.empty(); }
};

// Line-oriented format:
//   days N | acceleration X | seed N | name S
//   weather <trace path> | weather stub [rain=P]
//   noise bias=S daily=S [seed=N]
//   field <json path> | species <json path>
//   user <id> plot=<n> [name=<s>] [password=<s>]
//   mode <user> <day>[-<day>] <manual|hybrid|automated>
//   at <day> <HH:MM[:SS]> <action>
//   daily <HH:MM[:SS]> [days=<a>-<b>] <action>
// Actions:
//   login U | logout U | sow U <species> <x>,<y> | sow U <species> auto [xN]
//   water U all | weed U <x>,<y> | scan U [plot] | moisture U <x>,<y>
//   chat U <text> | feedback U <text> | weeds <plot> <count>
ParseResult parse_script(std::istream& in, const std::filesystem::path& base_dir = {});
ParseResult load_script(const std::filesystem::path& path);

// Loads field/species files named by the script over the defaults. Throws
// Error(kScriptInvalid) if they are unreadable.
garden::GardenConfig garden_config_for(const Script& script);

// Referential checks: species exist, plots valid and unique, every user's
// mode schedule covers 1..days without overlap, actions reference known
// users and fit the schedule, weather trace readable.
std::vector<Diagnostic> validate_script(const Script& script);

}  // namespace plotbot::scenario

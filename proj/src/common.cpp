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

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "plotbot/error.hpp"
#include "plotbot/gantry/geometry.hpp"
#include "plotbot/time.hpp"

namespace plotbot {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kToolAlreadyMounted: return "ToolAlreadyMounted";
    case ErrorCode::kUnknownTool: return "UnknownTool";
    case ErrorCode::kToolNotInBay: return "ToolNotInBay";
    case ErrorCode::kNoToolMounted: return "NoToolMounted";
    case ErrorCode::kWrongToolMounted: return "WrongToolMounted";
    case ErrorCode::kNotAtSeedContainer: return "NotAtSeedContainer";
    case ErrorCode::kNoSeedHeld: return "NoSeedHeld";
    case ErrorCode::kSeedAlreadyHeld: return "SeedAlreadyHeld";
    case ErrorCode::kRobotBusy: return "RobotBusy";
    case ErrorCode::kExecutionInterrupted: return "ExecutionInterrupted";
    case ErrorCode::kUnknownSpecies: return "UnknownSpecies";
    case ErrorCode::kEmptyTargetList: return "EmptyTargetList";
    case ErrorCode::kMalformedSequence: return "MalformedSequence";
    case ErrorCode::kQueueFull: return "QueueFull";
    case ErrorCode::kDuplicateWithinDebounce: return "DuplicateWithinDebounce";
    case ErrorCode::kQueueEmpty: return "QueueEmpty";
    case ErrorCode::kUnknownTask: return "UnknownTask";
    case ErrorCode::kNotCancellable: return "NotCancellable";
    case ErrorCode::kWeatherUnavailable: return "WeatherUnavailable";
    case ErrorCode::kInvalidWeatherTrace: return "InvalidWeatherTrace";
    case ErrorCode::kCrossPlotTarget: return "CrossPlotTarget";
    case ErrorCode::kUnknownPlant: return "UnknownPlant";
    case ErrorCode::kPlacementExhausted: return "PlacementExhausted";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kTaskRejected: return "TaskRejected";
    case ErrorCode::kNoFrames: return "NoFrames";
    case ErrorCode::kCorruptLog: return "CorruptLog";
    case ErrorCode::kUnknownPlot: return "UnknownPlot";
    case ErrorCode::kReplayDivergence: return "ReplayDivergence";
    case ErrorCode::kInvalidCredentials: return "InvalidCredentials";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kUnauthenticated: return "Unauthenticated";
    case ErrorCode::kMessageTooLong: return "MessageTooLong";
    case ErrorCode::kForbidden: return "Forbidden";
    case ErrorCode::kSlowConsumer: return "SlowConsumer";
    case ErrorCode::kCursorExpired: return "CursorExpired";
    case ErrorCode::kBadRequest: return "BadRequest";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kUnknownUser: return "UnknownUser";
    case ErrorCode::kScriptInvalid: return "ScriptInvalid";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Duration seconds_to_duration(double seconds) {
  return Duration{static_cast<Duration::rep>(std::llround(seconds * 1e6))};
}

double to_seconds(Duration d) noexcept { return static_cast<double>(d.count()) / 1e6; }

std::int64_t to_micros(Timestamp t) noexcept { return t.time_since_epoch().count(); }

Timestamp from_micros(std::int64_t us) noexcept { return Timestamp{Duration{us}}; }

std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  const auto frac = hms.subseconds().count();
  std::string out = fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}", static_cast<int>(ymd.year()),
                                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                                hms.hours().count(), hms.minutes().count(), hms.seconds().count());
  if (frac != 0) out += fmt::format(".{:06}", frac);
  out += 'Z';
  return out;
}

namespace {

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw Error(ErrorCode::kInvalidArgument, fmt::format("malformed ISO-8601 timestamp '{}'", text));
}

int read_fixed(std::string_view text, std::size_t pos, std::size_t width, std::string_view whole) {
  if (pos + width > text.size()) bad_timestamp(whole);
  int value = 0;
  const auto* first = text.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + width, value);
  if (ec != std::errc{} || ptr != first + width) bad_timestamp(whole);
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) bad_timestamp(text);
}

}  // namespace

Timestamp parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  const int y = read_fixed(text, 0, 4, text);
  expect_char(text, 4, '-');
  const int mo = read_fixed(text, 5, 2, text);
  expect_char(text, 7, '-');
  const int d = read_fixed(text, 8, 2, text);
  if (text.size() <= 10 || (text[10] != 'T' && text[10] != ' ')) bad_timestamp(text);
  const int h = read_fixed(text, 11, 2, text);
  expect_char(text, 13, ':');
  const int mi = read_fixed(text, 14, 2, text);
  expect_char(text, 16, ':');
  const int s = read_fixed(text, 17, 2, text);

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) bad_timestamp(text);

  std::size_t pos = 19;
  std::int64_t micros = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::int64_t scale = 100000;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (scale > 0) {
        micros += (text[pos] - '0') * scale;
        scale /= 10;
      }
      ++pos;
    }
    if (pos == start) bad_timestamp(text);
  }

  std::int64_t offset_s = 0;
  if (pos < text.size() && text[pos] == 'Z') {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    const int sign = text[pos] == '-' ? -1 : 1;
    const int oh = read_fixed(text, pos + 1, 2, text);
    expect_char(text, pos + 3, ':');
    const int om = read_fixed(text, pos + 4, 2, text);
    offset_s = sign * (oh * 3600 + om * 60);
    pos += 6;
  } else {
    bad_timestamp(text);
  }
  if (pos != text.size()) bad_timestamp(text);

  const auto base = sys_days{ymd} + hours{h} + minutes{mi} + std::chrono::seconds{s - offset_s};
  return time_point_cast<Duration>(base) + Duration{micros};
}

double distance(Coord2 a, Coord2 b) { return std::sqrt(static_cast<double>(squared_distance(a, b))); }

void to_json(nlohmann::json& j, const Coord2& c) { j = nlohmann::json::array({c.x_mm, c.y_mm}); }
void from_json(const nlohmann::json& j, Coord2& c) {
  c.x_mm = j.at(0).get<int>();
  c.y_mm = j.at(1).get<int>();
}
void to_json(nlohmann::json& j, const Coord3& c) { j = nlohmann::json::array({c.x_mm, c.y_mm, c.z_mm}); }
void from_json(const nlohmann::json& j, Coord3& c) {
  c.x_mm = j.at(0).get<int>();
  c.y_mm = j.at(1).get<int>();
  c.z_mm = j.at(2).get<int>();
}

namespace gantry {

std::string_view to_string(Tool tool) noexcept {
  switch (tool) {
    case Tool::none: return "none";
    case Tool::watering_nozzle: return "watering_nozzle";
    case Tool::seeder: return "seeder";
    case Tool::weeder: return "weeder";
    case Tool::moisture_probe: return "moisture_probe";
    case Tool::extra_slot: return "extra_slot";
  }
  return "none";
}

std::optional<Tool> tool_from_string(std::string_view name) noexcept {
  for (Tool t : {Tool::none, Tool::watering_nozzle, Tool::seeder, Tool::weeder, Tool::moisture_probe,
                 Tool::extra_slot}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

}  // namespace gantry
}  // namespace plotbot

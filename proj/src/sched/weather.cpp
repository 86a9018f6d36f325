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

#include "plotbot/sched/weather.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "plotbot/error.hpp"

namespace plotbot::sched {

namespace {

[[noreturn]] void bad_trace(const std::string& source, int line, const std::string& why) {
  throw Error(ErrorCode::kInvalidWeatherTrace, fmt::format("{}:{}: {}", source, line, why),
              {{"source", source}, {"line", line}});
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<WeatherSample> parse_weather_trace(std::istream& in, const std::string& source) {
  std::vector<WeatherSample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string ts;
    if (!(fields >> ts)) continue;
    int raining = 0;
    double rain_mm = 0, temp = 0;
    if (!(fields >> raining >> rain_mm >> temp)) bad_trace(source, lineno, "expected: timestamp raining rainfall_mm temperature_c");
    std::string extra;
    if (fields >> extra) bad_trace(source, lineno, fmt::format("unexpected trailing field '{}'", extra));
    if (raining != 0 && raining != 1) bad_trace(source, lineno, "raining flag must be 0 or 1");
    if (!(rain_mm >= 0.0)) bad_trace(source, lineno, "rainfall must be nonnegative");
    WeatherSample s;
    try {
      s.timestamp = parse_iso8601(ts);
    } catch (const Error& e) {
      bad_trace(source, lineno, e.what());
    }
    if (!out.empty() && s.timestamp <= out.back().timestamp)
      bad_trace(source, lineno, "timestamps must strictly increase");
    s.raining = raining == 1;
    s.rainfall_mm = rain_mm;
    s.temperature_c = temp;
    out.push_back(s);
  }
  return out;
}

std::vector<WeatherSample> load_weather_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidWeatherTrace, fmt::format("cannot open weather trace {}", path.string()));
  return parse_weather_trace(in, path.filename().string());
}

TraceWeatherProvider::TraceWeatherProvider(std::vector<WeatherSample> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 1; i < samples_.size(); ++i)
    if (samples_[i].timestamp <= samples_[i - 1].timestamp)
      throw Error(ErrorCode::kInvalidWeatherTrace, "weather samples must strictly increase in time");
}

WeatherSample TraceWeatherProvider::current(Timestamp now) {
  if (samples_.empty()) throw Error(ErrorCode::kWeatherUnavailable, "weather trace is empty");
  auto it = std::upper_bound(samples_.begin(), samples_.end(), now,
                             [](Timestamp t, const WeatherSample& s) { return t < s.timestamp; });
  if (it == samples_.begin()) return samples_.front();
  return *std::prev(it);
}

std::vector<WeatherSample> TraceWeatherProvider::between(Timestamp from, Timestamp to) {
  const auto lo = std::lower_bound(samples_.begin(), samples_.end(), from,
                                   [](const WeatherSample& s, Timestamp t) { return s.timestamp < t; });
  const auto hi = std::lower_bound(lo, samples_.end(), to,
                                   [](const WeatherSample& s, Timestamp t) { return s.timestamp < t; });
  return {lo, hi};
}

StubExternalWeather::StubExternalWeather(std::uint64_t seed, double rain_probability)
    : seed_(seed), rain_probability_(rain_probability) {}

void StubExternalWeather::check() const {
  if (outage_) throw Error(ErrorCode::kWeatherUnavailable, "external weather provider unreachable");
}

WeatherSample StubExternalWeather::sample_at(Timestamp hour) const {
  using namespace std::chrono;
  const auto hours = duration_cast<std::chrono::hours>(hour.time_since_epoch()).count();
  const auto day = static_cast<std::uint64_t>(hours / 24);
  WeatherSample s;
  s.timestamp = hour;
  s.raining = unit(splitmix(seed_ ^ (day * 0x2545F4914F6CDD1DULL))) < rain_probability_;
  s.rainfall_mm = s.raining ? 0.5 + 2.0 * unit(splitmix(seed_ + static_cast<std::uint64_t>(hours))) : 0.0;
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(hours % 24 - 9) / 24.0;
  s.temperature_c = 16.0 + 6.0 * std::sin(phase) - (s.raining ? 3.0 : 0.0);
  return s;
}

WeatherSample StubExternalWeather::current(Timestamp now) {
  check();
  return sample_at(std::chrono::floor<std::chrono::hours>(now));
}

std::vector<WeatherSample> StubExternalWeather::between(Timestamp from, Timestamp to) {
  check();
  std::vector<WeatherSample> out;
  for (auto t = std::chrono::ceil<std::chrono::hours>(from); t < to; t += std::chrono::hours(1))
    out.push_back(sample_at(t));
  return out;
}

DayWeather summarize_day(WeatherProvider& provider, Timestamp day_start) {
  auto samples = provider.between(day_start, day_start + std::chrono::hours(24));
  if (samples.empty()) samples.push_back(provider.current(day_start));
  DayWeather d;
  for (const auto& s : samples) {
    d.raining = d.raining || s.raining;
    d.rainfall_mm += s.rainfall_mm;
    d.mean_temperature_c += s.temperature_c;
  }
  d.mean_temperature_c /= static_cast<double>(samples.size());
  return d;
}

WeatherService::WeatherService(std::shared_ptr<WeatherProvider> provider) : provider_(std::move(provider)) {}

WeatherReading WeatherService::read(Timestamp now, Duration window) {
  std::lock_guard lock(mu_);
  try {
    WeatherReading r{provider_->current(now), provider_->between(now, now + window), false};
    last_known_ = r.current;
    return r;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kWeatherUnavailable || !last_known_) throw;
    return {*last_known_, {}, true};
  }
}

void to_json(nlohmann::json& j, const WeatherSample& s) {
  j = {{"timestamp", format_iso8601(s.timestamp)},
       {"raining", s.raining},
       {"rainfall_mm", s.rainfall_mm},
       {"temperature_c", s.temperature_c}};
}

void from_json(const nlohmann::json& j, WeatherSample& s) {
  s.timestamp = parse_iso8601(j.at("timestamp").get<std::string>());
  s.raining = j.at("raining").get<bool>();
  s.rainfall_mm = j.at("rainfall_mm").get<double>();
  s.temperature_c = j.at("temperature_c").get<double>();
}

void to_json(nlohmann::json& j, const DayWeather& d) {
  j = {{"raining", d.raining}, {"rainfall_mm", d.rainfall_mm}, {"mean_temperature_c", d.mean_temperature_c}};
}

void to_json(nlohmann::json& j, const WeatherReading& r) {
  j = {{"current", r.current}, {"forecast", r.forecast}, {"stale", r.stale}};
}

}  // namespace plotbot::sched

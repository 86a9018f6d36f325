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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plotbot/time.hpp"

namespace plotbot::sched {

struct WeatherSample {
  Timestamp timestamp{};
  bool raining = false;
  double rainfall_mm = 0.0;
  double temperature_c = 0.0;

  bool operator==(const WeatherSample&) const = default;
};

// Trace file: one sample per line,
//   <ISO-8601 timestamp> <raining 0|1> <rainfall mm> <temperature C>
// Blank lines and '#' comments are ignored. Timestamps must strictly
// increase. Throws Error(kInvalidWeatherTrace) with the line number.
std::vector<WeatherSample> parse_weather_trace(std::istream& in, const std::string& source = "trace");
std::vector<WeatherSample> load_weather_trace(const std::filesystem::path& path);

class WeatherProvider {
 public:
  virtual ~WeatherProvider() = default;
  virtual std::string name() const = 0;
  // Latest sample at or before `now`. Throws Error(kWeatherUnavailable).
  virtual WeatherSample current(Timestamp now) = 0;
  // Samples with from <= t < to.
  virtual std::vector<WeatherSample> between(Timestamp from, Timestamp to) = 0;
};

// Replays a recorded trace. Before the first sample the first sample is
// served; after the last, the last.
class TraceWeatherProvider final : public WeatherProvider {
 public:
  explicit TraceWeatherProvider(std::vector<WeatherSample> samples);
  std::string name() const override { return "trace"; }
  WeatherSample current(Timestamp now) override;
  std::vector<WeatherSample> between(Timestamp from, Timestamp to) override;
  const std::vector<WeatherSample>& samples() const { return samples_; }

 private:
  std::vector<WeatherSample> samples_;
};

// Stand-in for a remote forecast service: deterministic hourly weather from
// a seed, plus an outage switch for fault injection.
class StubExternalWeather final : public WeatherProvider {
 public:
  explicit StubExternalWeather(std::uint64_t seed = 1, double rain_probability = 0.2);
  std::string name() const override { return "stub_external"; }
  WeatherSample current(Timestamp now) override;
  std::vector<WeatherSample> between(Timestamp from, Timestamp to) override;
  void set_outage(bool down) { outage_ = down; }
  bool outage() const { return outage_; }

 private:
  WeatherSample sample_at(Timestamp hour) const;
  void check() const;

  std::uint64_t seed_;
  double rain_probability_;
  std::atomic<bool> outage_{false};
};

struct DayWeather {
  bool raining = false;
  double rainfall_mm = 0.0;
  double mean_temperature_c = 0.0;
};

// Aggregates the samples of [day_start, day_start + 24 h). With no sample in
// the window the current sample at day_start stands in.
DayWeather summarize_day(WeatherProvider& provider, Timestamp day_start);

struct WeatherReading {
  WeatherSample current;
  std::vector<WeatherSample> forecast;
  bool stale = false;
};

// Serves provider data and falls back to the last known sample, flagged
// stale, while the provider is unavailable.
class WeatherService {
 public:
  explicit WeatherService(std::shared_ptr<WeatherProvider> provider);
  // Throws Error(kWeatherUnavailable) only if nothing was ever fetched.
  WeatherReading read(Timestamp now, Duration forecast_window);
  WeatherProvider& provider() { return *provider_; }

 private:
  std::shared_ptr<WeatherProvider> provider_;
  std::mutex mu_;
  std::optional<WeatherSample> last_known_;
};

void to_json(nlohmann::json& j, const WeatherSample& s);
void from_json(const nlohmann::json& j, WeatherSample& s);
void to_json(nlohmann::json& j, const DayWeather& d);
void to_json(nlohmann::json& j, const WeatherReading& r);

}  // namespace plotbot::sched

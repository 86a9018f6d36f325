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

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace plotbot {

// Simulated wall time. Microsecond resolution keeps fractional motion
// durations (12.5 s) exact while staying integral for ordering.
using Duration = std::chrono::microseconds;
using Timestamp = std::chrono::sys_time<Duration>;

inline constexpr std::int64_t kSecondsPerDay = 86400;

Duration seconds_to_duration(double seconds);
double to_seconds(Duration d) noexcept;

// "2024-06-03T06:00:00Z", with an optional ".ffffff" fraction when nonzero.
std::string format_iso8601(Timestamp t);

// Accepts YYYY-MM-DDTHH:MM:SS[.frac](Z|+HH:MM|-HH:MM). Throws plotbot::Error
// (kInvalidArgument) on malformed input.
Timestamp parse_iso8601(std::string_view text);

std::int64_t to_micros(Timestamp t) noexcept;
Timestamp from_micros(std::int64_t us) noexcept;

}  // namespace plotbot

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

#include "plotbot/sched/clock.hpp"

#include <algorithm>
#include <thread>

#include "plotbot/error.hpp"

namespace plotbot::sched {

SimClock::SimClock(Timestamp start, double acceleration)
    : now_(start), last_stamp_(start - Duration{1}), acceleration_(acceleration) {
  if (!(acceleration > 0.0)) throw Error(ErrorCode::kInvalidArgument, "acceleration must be positive");
}

Timestamp SimClock::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

Timestamp SimClock::advance_to(Timestamp t) {
  std::lock_guard lock(mu_);
  now_ = std::max(now_, t);
  return now_;
}

Timestamp SimClock::advance_by(Duration d) {
  std::lock_guard lock(mu_);
  if (d > Duration::zero()) now_ += d;
  return now_;
}

Timestamp SimClock::stamp() {
  std::lock_guard lock(mu_);
  last_stamp_ = std::max(now_, last_stamp_ + Duration{1});
  return last_stamp_;
}

void SimClock::observe_stamp(Timestamp t) {
  std::lock_guard lock(mu_);
  last_stamp_ = std::max(last_stamp_, t);
}

double SimClock::acceleration() const {
  std::lock_guard lock(mu_);
  return acceleration_;
}

void SimClock::set_acceleration(double factor) {
  if (!(factor > 0.0)) throw Error(ErrorCode::kInvalidArgument, "acceleration must be positive");
  std::lock_guard lock(mu_);
  acceleration_ = factor;
}

void SimClock::set_pacing(bool on) {
  std::lock_guard lock(mu_);
  pacing_ = on;
}

bool SimClock::pacing() const {
  std::lock_guard lock(mu_);
  return pacing_;
}

void SimClock::pace(Duration simulated) const {
  double factor = 0;
  {
    std::lock_guard lock(mu_);
    if (!pacing_ || simulated <= Duration::zero()) return;
    factor = acceleration_;
  }
  std::this_thread::sleep_for(std::chrono::duration<double>(to_seconds(simulated) / factor));
}

}  // namespace plotbot::sched

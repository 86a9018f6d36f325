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

#include <mutex>

#include "plotbot/time.hpp"

namespace plotbot::sched {

// Simulated clock. Time is virtual: it moves only when the driver advances
// it, so the acceleration factor never reorders anything. With pacing on,
// pace() sleeps simulated / acceleration of wall time, which lets a live
// server show the robot moving at a watchable speed.
class SimClock {
 public:
  explicit SimClock(Timestamp start = Timestamp{}, double acceleration = 1.0);

  Timestamp now() const;
  // Never moves backwards; an earlier target leaves the clock unchanged.
  Timestamp advance_to(Timestamp t);
  Timestamp advance_by(Duration d);

  // Strictly increasing submission stamps, never earlier than now().
  Timestamp stamp();
  // Records a stamp issued elsewhere (log replay) so later stamps exceed it.
  void observe_stamp(Timestamp t);

  double acceleration() const;
  // Throws Error(kInvalidArgument) unless factor > 0.
  void set_acceleration(double factor);
  void set_pacing(bool on);
  bool pacing() const;
  void pace(Duration simulated) const;

 private:
  mutable std::mutex mu_;
  Timestamp now_;
  Timestamp last_stamp_;
  double acceleration_;
  bool pacing_ = false;
};

}  // namespace plotbot::sched

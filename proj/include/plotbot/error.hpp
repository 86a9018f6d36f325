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

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace plotbot {

// Stable integer codes. Clients key on these; never renumber.
enum class ErrorCode : int {
  // gantry-sim
  kOutOfBounds = 100,
  kToolAlreadyMounted = 101,
  kUnknownTool = 102,
  kToolNotInBay = 103,
  kNoToolMounted = 104,
  kWrongToolMounted = 105,
  kNotAtSeedContainer = 106,
  kNoSeedHeld = 107,
  kSeedAlreadyHeld = 108,
  kRobotBusy = 109,
  kExecutionInterrupted = 110,

  // task-compiler
  kUnknownSpecies = 200,
  kEmptyTargetList = 201,
  kMalformedSequence = 202,

  // scheduler
  kQueueFull = 300,
  kDuplicateWithinDebounce = 301,
  kQueueEmpty = 302,
  kUnknownTask = 303,
  kNotCancellable = 304,
  kWeatherUnavailable = 305,
  kInvalidWeatherTrace = 306,

  // policy
  kCrossPlotTarget = 400,
  kUnknownPlant = 401,
  kPlacementExhausted = 402,
  kInvalidArgument = 403,
  kTaskRejected = 410,

  // field-model
  kNoFrames = 500,
  kCorruptLog = 501,
  kUnknownPlot = 502,
  kReplayDivergence = 503,

  // api-service
  kInvalidCredentials = 600,
  kRateLimited = 601,
  kUnauthenticated = 602,
  kMessageTooLong = 603,
  kForbidden = 604,
  kSlowConsumer = 605,
  kCursorExpired = 606,
  kBadRequest = 607,
  kNotFound = 608,
  kUnknownUser = 609,

  // scenario-runner
  kScriptInvalid = 700,

  kInvalidConfig = 800,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace plotbot

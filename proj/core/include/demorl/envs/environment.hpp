// Copyright 2026 The demorl Authors
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

#include <memory>
#include <optional>
#include <string>

#include "demorl/numerics/rng.hpp"
#include "demorl/numerics/types.hpp"

namespace demorl::envs {

struct EnvSpec {
  int state_dim = 1;
  int action_dim = 1;
  Vector action_low;
  Vector action_high;
  int horizon = 200;  // steps per episode
  double gamma = 0.99;

  /// Throws ParameterError unless n, m >= 1, low < high and gamma in (0, 1).
  void validate() const;
  Vector action_center() const { return 0.5 * (action_high + action_low); }
  Vector action_half_range() const { return 0.5 * (action_high - action_low); }
};

struct Transition {
  Vector state;
  Vector action;
  double reward = 0.0;
  Vector next_state;
  bool done = false;

  bool finite() const;
};

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool done = false;
};

/// Deterministic ground-truth dynamics. Instances hold only configuration; the
/// episode state lives with the caller, so a const environment can be shared
/// by any number of rollouts.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual const EnvSpec& spec() const = 0;
  /// Draws an initial state from the configured start distribution.
  virtual Vector reset(Rng& rng) const = 0;
  /// Clips the action to bounds, integrates one control step and returns the
  /// reward. Throws NumericError if the state becomes non-finite.
  virtual StepResult step(const Vector& state, const Vector& action) const = 0;
  /// Upper bound on |reward| over the reachable state-action set.
  virtual double reward_bound() const = 0;
  /// End-effector tracking error for tracking tasks; nullopt otherwise.
  virtual std::optional<double> tracking_error(const Vector& /*state*/) const {
    return std::nullopt;
  }
  virtual std::unique_ptr<Environment> clone() const = 0;
};

Vector clip_action(const EnvSpec& spec, const Vector& action);

}  // namespace demorl::envs

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

#include <numbers>

#include "demorl/envs/environment.hpp"

namespace demorl::envs {

struct PendulumParams {
  double mass = 1.0;     // kg
  double length = 1.0;   // m
  double gravity = 9.81; // m/s^2
  double damping = 0.0;  // N m s / rad
  double dt = 0.05;      // control period, s
  int substeps = 10;     // semi-implicit Euler sub-steps per control period
  double max_torque = 2.0;
  double max_speed = 8.0;  // rad/s, angular velocity is clipped to this
  int horizon = 200;
  double gamma = 0.99;
  double init_angle_range = std::numbers::pi;  // |angle from upright| <= range
  double init_speed_range = 1.0;
};

/// Torque-limited point-mass pendulum swing-up.
///
/// State is (cos θ, sin θ, ω) with θ measured from the upright position, so the
/// goal configuration is (1, 0, 0). Reward is -(θ² + 0.1 ω² + 0.001 u²) with θ
/// wrapped to [-π, π], evaluated at the pre-step state and the clipped action.
class Pendulum final : public Environment {
 public:
  explicit Pendulum(PendulumParams params = {});

  std::string name() const override { return "pendulum"; }
  const EnvSpec& spec() const override { return spec_; }
  Vector reset(Rng& rng) const override;
  StepResult step(const Vector& state, const Vector& action) const override;
  double reward_bound() const override;
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<Pendulum>(*this);
  }

  const PendulumParams& params() const { return params_; }

  static Vector make_state(double angle_from_upright, double angular_velocity);
  static double angle(const Vector& state);
  /// ½ m l² ω² + m g l cos θ (θ from upright).
  double energy(const Vector& state) const;

 private:
  PendulumParams params_;
  EnvSpec spec_;
};

double wrap_angle(double angle);

}  // namespace demorl::envs

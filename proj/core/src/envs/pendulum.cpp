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

#include "demorl/envs/pendulum.hpp"

#include <algorithm>
#include <cmath>

#include "demorl/errors.hpp"

namespace demorl::envs {

double wrap_angle(double angle) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

Pendulum::Pendulum(PendulumParams params) : params_(params) {
  if (!(params_.mass > 0 && params_.length > 0 && params_.dt > 0 &&
        params_.max_torque > 0 && params_.max_speed > 0) ||
      params_.substeps < 1 || params_.damping < 0) {
    throw ParameterError("Pendulum: physical constants must be positive");
  }
  spec_.state_dim = 3;
  spec_.action_dim = 1;
  spec_.action_low = Vector::Constant(1, -params_.max_torque);
  spec_.action_high = Vector::Constant(1, params_.max_torque);
  spec_.horizon = params_.horizon;
  spec_.gamma = params_.gamma;
  spec_.validate();
}

Vector Pendulum::make_state(double angle_from_upright, double angular_velocity) {
  Vector s(3);
  s << std::cos(angle_from_upright), std::sin(angle_from_upright), angular_velocity;
  return s;
}

double Pendulum::angle(const Vector& state) { return std::atan2(state[1], state[0]); }

double Pendulum::energy(const Vector& state) const {
  const double ml2 = params_.mass * params_.length * params_.length;
  return 0.5 * ml2 * state[2] * state[2] +
         params_.mass * params_.gravity * params_.length * std::cos(angle(state));
}

Vector Pendulum::reset(Rng& rng) const {
  const double theta = rng.uniform(-params_.init_angle_range, params_.init_angle_range);
  const double omega = rng.uniform(-params_.init_speed_range, params_.init_speed_range);
  return make_state(theta, omega);
}

StepResult Pendulum::step(const Vector& state, const Vector& action) const {
  if (state.size() != 3) throw DimensionError("Pendulum: state must have 3 entries");
  const double u = clip_action(spec_, action)[0];
  double theta = angle(state);
  double omega = state[2];
  const double wrapped = wrap_angle(theta);
  const double reward = -(wrapped * wrapped + 0.1 * omega * omega + 0.001 * u * u);

  const double h = params_.dt / params_.substeps;
  const double ml2 = params_.mass * params_.length * params_.length;
  for (int k = 0; k < params_.substeps; ++k) {
    const double accel = params_.gravity / params_.length * std::sin(theta) +
                         (u - params_.damping * omega) / ml2;
    omega = std::clamp(omega + h * accel, -params_.max_speed, params_.max_speed);
    theta += h * omega;
  }
  if (!std::isfinite(theta) || !std::isfinite(omega)) {
    throw NumericError("Pendulum: integration produced a non-finite state");
  }
  return {make_state(theta, omega), reward, false};
}

double Pendulum::reward_bound() const {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return pi2 + 0.1 * params_.max_speed * params_.max_speed +
         0.001 * params_.max_torque * params_.max_torque;
}

}  // namespace demorl::envs

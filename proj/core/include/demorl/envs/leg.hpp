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

#include <Eigen/Dense>

#include "demorl/envs/environment.hpp"

namespace demorl::envs {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct LegTarget {
  Vec2 position;   // m
  Vec2 velocity;   // m/s
  double phase = 0.0;  // [0, 2π)
};

struct ForwardKinematics {
  Vec2 position;
  Mat2 jacobian;  // ∂p/∂q
};

/// Planar 2R chain, angles measured from the +x axis (q1) and relative to the
/// first link (q2).
ForwardKinematics leg_forward_kinematics(const Vec2& q, const Vec2& lengths);

/// 0.8 exp(-|p - p_d|²) + 0.2 exp(-|ṗ - ṗ_d|²).
double leg_reward(const Vec2& p, const Vec2& p_d, const Vec2& pdot, const Vec2& pdot_d);

/// Foot target on a semi-ellipse whose lower half is flattened onto the chord.
/// `center` is (chord midpoint x, chord height y). Phase in [0, π) runs the
/// straight stance segment from x = cx - a to cx + a; phase in [π, 2π) runs the
/// elliptical swing back over the apex (cx, cy + b) at phase 3π/2.
LegTarget semi_ellipse_target(double phase, const Vec2& center, const Vec2& semi_axes,
                              double period);

struct LegParams {
  Vec2 lengths{0.15, 0.15};  // m
  Vec2 masses{0.3, 0.3};     // kg, uniform rods
  double gravity = 9.81;
  double damping = 0.02;     // N m s / rad, per joint
  double dt = 0.002;         // control period (500 Hz)
  int substeps = 10;
  double max_torque = 1.5;   // N m
  double max_joint_speed = 30.0;
  Vec2 q_min{-std::numbers::pi + 0.2, 0.1};
  Vec2 q_max{-0.2, std::numbers::pi - 0.1};
  Vec2 ellipse_center{0.0, -0.22};
  Vec2 ellipse_axes{0.08, 0.04};
  double gait_period = 1.0;  // s
  double init_joint_noise = 0.05;  // rad
  int horizon = 500;
  double gamma = 0.99;
};

/// Torque-driven 2R leg tracking a semi-elliptical foot path.
///
/// State is (q1, q2, q̇1, q̇2, cos φ, sin φ) with φ the gait phase. Reward is
/// leg_reward evaluated after the step against the target at the new phase.
class Leg final : public Environment {
 public:
  explicit Leg(LegParams params = {});

  std::string name() const override { return "leg"; }
  const EnvSpec& spec() const override { return spec_; }
  Vector reset(Rng& rng) const override;
  StepResult step(const Vector& state, const Vector& action) const override;
  double reward_bound() const override { return 1.0; }
  std::optional<double> tracking_error(const Vector& state) const override;
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<Leg>(*this);
  }

  const LegParams& params() const { return params_; }
  LegTarget target(double phase) const;
  static double phase_of(const Vector& state);
  /// Elbow-up inverse kinematics (q2 > 0).
  Vec2 inverse_kinematics(const Vec2& p) const;
  Vec2 joint_accelerations(const Vec2& q, const Vec2& qd, const Vec2& tau) const;

 private:
  LegParams params_;
  EnvSpec spec_;
};

}  // namespace demorl::envs

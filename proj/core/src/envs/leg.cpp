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

#include "demorl/envs/leg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "demorl/errors.hpp"

namespace demorl::envs {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double phase) {
  double p = std::fmod(phase, kTwoPi);
  if (p < 0) p += kTwoPi;
  return p;
}

}  // namespace

ForwardKinematics leg_forward_kinematics(const Vec2& q, const Vec2& lengths) {
  const double c1 = std::cos(q[0]);
  const double s1 = std::sin(q[0]);
  const double c12 = std::cos(q[0] + q[1]);
  const double s12 = std::sin(q[0] + q[1]);
  ForwardKinematics fk;
  fk.position << lengths[0] * c1 + lengths[1] * c12, lengths[0] * s1 + lengths[1] * s12;
  fk.jacobian << -lengths[0] * s1 - lengths[1] * s12, -lengths[1] * s12,
                  lengths[0] * c1 + lengths[1] * c12,  lengths[1] * c12;
  return fk;
}

double leg_reward(const Vec2& p, const Vec2& p_d, const Vec2& pdot, const Vec2& pdot_d) {
  return 0.8 * std::exp(-(p - p_d).squaredNorm()) +
         0.2 * std::exp(-(pdot - pdot_d).squaredNorm());
}

LegTarget semi_ellipse_target(double phase, const Vec2& center, const Vec2& semi_axes,
                              double period) {
  if (!(period > 0)) throw ParameterError("semi_ellipse_target: period must be positive");
  const double phi = wrap_phase(phase);
  const double rate = kTwoPi / period;
  const double a = semi_axes[0];
  const double b = semi_axes[1];
  LegTarget t;
  t.phase = phi;
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const bool swing = phi >= std::numbers::pi;
  t.position << center[0] - a * c, center[1] + (swing ? -b * s : 0.0);
  t.velocity << a * s * rate, swing ? -b * c * rate : 0.0;
  return t;
}

Leg::Leg(LegParams params) : params_(std::move(params)) {
  if (!(params_.lengths.minCoeff() > 0 && params_.masses.minCoeff() > 0 &&
        params_.dt > 0 && params_.max_torque > 0 && params_.gait_period > 0) ||
      params_.substeps < 1) {
    throw ParameterError("Leg: physical constants must be positive");
  }
  spec_.state_dim = 6;
  spec_.action_dim = 2;
  spec_.action_low = Vector::Constant(2, -params_.max_torque);
  spec_.action_high = Vector::Constant(2, params_.max_torque);
  spec_.horizon = params_.horizon;
  spec_.gamma = params_.gamma;
  spec_.validate();
}

LegTarget Leg::target(double phase) const {
  return semi_ellipse_target(phase, params_.ellipse_center, params_.ellipse_axes,
                             params_.gait_period);
}

double Leg::phase_of(const Vector& state) { return wrap_phase(std::atan2(state[5], state[4])); }

Vec2 Leg::inverse_kinematics(const Vec2& p) const {
  const double l1 = params_.lengths[0];
  const double l2 = params_.lengths[1];
  const double c2 = std::clamp((p.squaredNorm() - l1 * l1 - l2 * l2) / (2 * l1 * l2), -1.0, 1.0);
  const double q2 = std::acos(c2);
  const double q1 = std::atan2(p[1], p[0]) - std::atan2(l2 * std::sin(q2), l1 + l2 * c2);
  return {q1, q2};
}

Vec2 Leg::joint_accelerations(const Vec2& q, const Vec2& qd, const Vec2& tau) const {
  const double l1 = params_.lengths[0];
  const double m1 = params_.masses[0];
  const double m2 = params_.masses[1];
  const double lc1 = 0.5 * l1;
  const double lc2 = 0.5 * params_.lengths[1];
  const double i1 = m1 * l1 * l1 / 12.0;
  const double i2 = m2 * params_.lengths[1] * params_.lengths[1] / 12.0;
  const double c2 = std::cos(q[1]);
  const double s2 = std::sin(q[1]);
  const double g = params_.gravity;

  Mat2 mass;
  mass(0, 0) = i1 + i2 + m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * c2);
  mass(0, 1) = i2 + m2 * (lc2 * lc2 + l1 * lc2 * c2);
  mass(1, 0) = mass(0, 1);
  mass(1, 1) = i2 + m2 * lc2 * lc2;

  const double h = m2 * l1 * lc2 * s2;
  Vec2 coriolis(-h * (2 * qd[0] * qd[1] + qd[1] * qd[1]), h * qd[0] * qd[0]);
  Vec2 gravity((m1 * lc1 + m2 * l1) * g * std::cos(q[0]) + m2 * lc2 * g * std::cos(q[0] + q[1]),
               m2 * lc2 * g * std::cos(q[0] + q[1]));
  const Vec2 rhs = tau - coriolis - gravity - params_.damping * qd;
  return mass.ldlt().solve(rhs);
}

Vector Leg::reset(Rng& rng) const {
  const double phase = rng.uniform(0.0, kTwoPi);
  Vec2 q = inverse_kinematics(target(phase).position);
  for (int i = 0; i < 2; ++i) {
    q[i] += rng.uniform(-params_.init_joint_noise, params_.init_joint_noise);
    q[i] = std::clamp(q[i], params_.q_min[i], params_.q_max[i]);
  }
  Vector s(6);
  s << q[0], q[1], 0.0, 0.0, std::cos(phase), std::sin(phase);
  return s;
}

StepResult Leg::step(const Vector& state, const Vector& action) const {
  if (state.size() != 6) throw DimensionError("Leg: state must have 6 entries");
  const Vector u = clip_action(spec_, action);
  const Vec2 tau(u[0], u[1]);
  Vec2 q(state[0], state[1]);
  Vec2 qd(state[2], state[3]);
  const double h = params_.dt / params_.substeps;
  for (int k = 0; k < params_.substeps; ++k) {
    const Vec2 qdd = joint_accelerations(q, qd, tau);
    qd += h * qdd;
    qd = qd.cwiseMax(-params_.max_joint_speed).cwiseMin(params_.max_joint_speed);
    q += h * qd;
    for (int i = 0; i < 2; ++i) {
      if (q[i] < params_.q_min[i]) {
        q[i] = params_.q_min[i];
        qd[i] = std::max(qd[i], 0.0);
      } else if (q[i] > params_.q_max[i]) {
        q[i] = params_.q_max[i];
        qd[i] = std::min(qd[i], 0.0);
      }
    }
  }
  if (!q.allFinite() || !qd.allFinite()) {
    throw NumericError("Leg: integration produced a non-finite state");
  }
  const double phase = wrap_phase(phase_of(state) + kTwoPi * params_.dt / params_.gait_period);
  StepResult r;
  r.next_state.resize(6);
  r.next_state << q[0], q[1], qd[0], qd[1], std::cos(phase), std::sin(phase);
  const auto fk = leg_forward_kinematics(q, params_.lengths);
  const LegTarget t = target(phase);
  r.reward = leg_reward(fk.position, t.position, fk.jacobian * qd, t.velocity);
  return r;
}

std::optional<double> Leg::tracking_error(const Vector& state) const {
  const auto fk = leg_forward_kinematics(Vec2(state[0], state[1]), params_.lengths);
  return (fk.position - target(phase_of(state)).position).norm();
}

}  // namespace demorl::envs

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

#include "demorl/envs/lq.hpp"

#include <algorithm>

#include "demorl/errors.hpp"

namespace demorl::envs {

LqParams LqParams::defaults() {
  LqParams p;
  p.A.resize(2, 2);
  p.A << 0.95, 0.1,
         0.0, 0.95;
  p.B.resize(2, 1);
  p.B << 0.05,
         0.1;
  p.Q = Matrix::Identity(2, 2);
  p.R = 0.1 * Matrix::Identity(1, 1);
  p.x0 = Vector::Zero(2);
  return p;
}

LinearQuadratic::LinearQuadratic(LqParams params) : params_(std::move(params)) {
  const auto n = params_.A.rows();
  const auto m = params_.B.cols();
  if (params_.A.cols() != n || params_.B.rows() != n || params_.Q.rows() != n ||
      params_.Q.cols() != n || params_.R.rows() != m || params_.R.cols() != m ||
      params_.x0.size() != n) {
    throw DimensionError("LinearQuadratic: inconsistent A, B, Q, R, x0 shapes");
  }
  if (params_.init_std < 0 || !(params_.action_bound > 0) || !(params_.state_box > 0)) {
    throw ParameterError("LinearQuadratic: bad start or bound parameters");
  }
  spec_.state_dim = static_cast<int>(n);
  spec_.action_dim = static_cast<int>(m);
  spec_.action_low = Vector::Constant(m, -params_.action_bound);
  spec_.action_high = Vector::Constant(m, params_.action_bound);
  spec_.horizon = params_.horizon;
  spec_.gamma = params_.gamma;
  spec_.validate();
}

Vector LinearQuadratic::reset(Rng& rng) const {
  Vector x = params_.x0;
  if (params_.init_std > 0) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += params_.init_std * rng.normal();
  }
  return x;
}

double LinearQuadratic::stage_cost(const Vector& x, const Vector& u) const {
  return x.dot(params_.Q * x) + u.dot(params_.R * u);
}

StepResult LinearQuadratic::step(const Vector& state, const Vector& action) const {
  if (state.size() != spec_.state_dim) throw DimensionError("LQ: state length mismatch");
  const Vector u = clip_action(spec_, action);
  StepResult r;
  r.reward = -stage_cost(state, u);
  r.next_state = params_.A * state + params_.B * u;
  if (!r.next_state.allFinite()) throw NumericError("LQ: non-finite state");
  return r;
}

double max_quadratic_on_box(const Matrix& W, double half_width) {
  const auto n = W.rows();
  if (n > 20) throw ParameterError("max_quadratic_on_box: dimension too large");
  double best = 0.0;
  Vector v(n);
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    for (Eigen::Index i = 0; i < n; ++i) v[i] = (mask >> i) & 1 ? half_width : -half_width;
    best = std::max(best, v.dot(W * v));
  }
  return best;
}

double LinearQuadratic::reward_bound() const {
  return max_quadratic_on_box(params_.Q, params_.state_box) +
         max_quadratic_on_box(params_.R, params_.action_bound);
}

}  // namespace demorl::envs

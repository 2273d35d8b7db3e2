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

#include "demorl/envs/environment.hpp"

namespace demorl::envs {

struct LqParams {
  Matrix A;  // n x n
  Matrix B;  // n x m
  Matrix Q;  // n x n, state cost weight
  Matrix R;  // m x m, action cost weight
  Vector x0;         // start-distribution mean
  double init_std = 1.0;  // 0 gives the degenerate start distribution δ(x0)
  double action_bound = 5.0;
  /// Half-width of the box the reward bound is computed over.
  double state_box = 5.0;
  int horizon = 50;
  double gamma = 0.99;

  /// Stable, controllable 2-state / 1-action default.
  static LqParams defaults();
};

/// x' = A x + B u, reward -(xᵀQx + uᵀRu).
class LinearQuadratic final : public Environment {
 public:
  explicit LinearQuadratic(LqParams params = LqParams::defaults());

  std::string name() const override { return "lq"; }
  const EnvSpec& spec() const override { return spec_; }
  Vector reset(Rng& rng) const override;
  StepResult step(const Vector& state, const Vector& action) const override;
  /// Max of xᵀQx + uᵀRu over |x_i| <= state_box, |u_j| <= action_bound.
  double reward_bound() const override;
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<LinearQuadratic>(*this);
  }

  const LqParams& params() const { return params_; }
  double stage_cost(const Vector& x, const Vector& u) const;

 private:
  LqParams params_;
  EnvSpec spec_;
};

/// max over the box |x_i| <= half_width of xᵀ W x for symmetric PSD W,
/// by vertex enumeration (the maximum of a convex function sits at a vertex).
double max_quadratic_on_box(const Matrix& W, double half_width);

}  // namespace demorl::envs

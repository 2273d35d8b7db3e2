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

#include <vector>

#include "demorl/numerics/types.hpp"

namespace demorl::regret {

/// Discounted linear-quadratic problem
///   Σ_{h<H} γ^h (x_hᵀQx_h + u_hᵀRu_h) + γ^H x_Hᵀ P_f x_H,  x_{h+1} = A x_h + B u_h.
struct LqProblem {
  Matrix A;
  Matrix B;
  Matrix Q;
  Matrix R;
  double gamma = 0.99;
  Matrix terminal;  // P_f; empty means zero

  /// Throws DimensionError on inconsistent shapes and ParameterError unless
  /// Q is positive semi-definite and R positive definite.
  void validate() const;
};

struct LqSolution {
  Matrix actions;  // H x m, optimal open-loop sequence from x0
  double cost = 0.0;
  std::vector<Matrix> gains;  // u_h = -K_h x_h
};

/// Exact finite-horizon optimum by backward Riccati recursion.
LqSolution lq_oracle(const LqProblem& problem, const Vector& x0, int horizon);

/// Cost of an open-loop action sequence (H x m) under the problem's dynamics.
double lq_sequence_cost(const LqProblem& problem, const Vector& x0, const Matrix& actions);

struct RiccatiFixedPoint {
  Matrix P;  // value matrix, V(x) = xᵀPx
  Matrix K;  // stationary gain, u = -K x
};

/// Fixed point of the discounted Riccati map, by value iteration.
RiccatiFixedPoint discounted_riccati(const Matrix& A, const Matrix& B, const Matrix& Q,
                                     const Matrix& R, double gamma, int max_iters = 100000,
                                     double tol = 1e-12);

}  // namespace demorl::regret

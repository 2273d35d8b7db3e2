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

#include "demorl/regret/lq_oracle.hpp"

#include <vector>

#include "demorl/errors.hpp"

namespace demorl::regret {
namespace {

Matrix terminal_of(const LqProblem& p) {
  return p.terminal.size() == 0 ? Matrix::Zero(p.A.rows(), p.A.rows()) : p.terminal;
}

}  // namespace

void LqProblem::validate() const {
  const auto n = A.rows();
  const auto m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
      R.cols() != m || (terminal.size() != 0 && (terminal.rows() != n || terminal.cols() != n))) {
    throw DimensionError("LqProblem: inconsistent shapes");
  }
  if (!(gamma > 0 && gamma <= 1)) throw ParameterError("LqProblem: gamma must lie in (0, 1]");
  const Eigen::SelfAdjointEigenSolver<Matrix> q(0.5 * (Q + Q.transpose()));
  const Eigen::SelfAdjointEigenSolver<Matrix> r(0.5 * (R + R.transpose()));
  if (q.eigenvalues().minCoeff() < -1e-12) throw ParameterError("LqProblem: Q is not PSD");
  if (r.eigenvalues().minCoeff() <= 0) throw ParameterError("LqProblem: R is not PD");
}

LqSolution lq_oracle(const LqProblem& p, const Vector& x0, int horizon) {
  p.validate();
  if (horizon < 1) throw ParameterError("lq_oracle: horizon must be at least 1");
  if (x0.size() != p.A.rows()) throw DimensionError("lq_oracle: start state size mismatch");
  LqSolution s;
  s.gains.resize(horizon);
  Matrix P = terminal_of(p);
  for (int h = horizon - 1; h >= 0; --h) {
    const Matrix BtP = p.B.transpose() * P;
    const Matrix K = (p.R + p.gamma * BtP * p.B).ldlt().solve(p.gamma * BtP * p.A);
    const Matrix Acl = p.A - p.B * K;
    P = p.Q + K.transpose() * p.R * K + p.gamma * Acl.transpose() * P * Acl;
    P = 0.5 * (P + P.transpose());
    s.gains[h] = K;
  }
  s.cost = x0.dot(P * x0);
  s.actions.resize(horizon, p.B.cols());
  Vector x = x0;
  for (int h = 0; h < horizon; ++h) {
    const Vector u = -s.gains[h] * x;
    s.actions.row(h) = u.transpose();
    x = p.A * x + p.B * u;
  }
  return s;
}

double lq_sequence_cost(const LqProblem& p, const Vector& x0, const Matrix& actions) {
  if (actions.cols() != p.B.cols()) throw DimensionError("lq_sequence_cost: action width");
  Vector x = x0;
  double cost = 0.0;
  double discount = 1.0;
  for (Eigen::Index h = 0; h < actions.rows(); ++h) {
    const Vector u = actions.row(h).transpose();
    cost += discount * (x.dot(p.Q * x) + u.dot(p.R * u));
    x = p.A * x + p.B * u;
    discount *= p.gamma;
  }
  return cost + discount * x.dot(terminal_of(p) * x);
}

RiccatiFixedPoint discounted_riccati(const Matrix& A, const Matrix& B, const Matrix& Q,
                                     const Matrix& R, double gamma, int max_iters, double tol) {
  LqProblem p{A, B, Q, R, gamma, {}};
  p.validate();
  Matrix P = Q;
  Matrix K;
  for (int it = 0; it < max_iters; ++it) {
    const Matrix BtP = B.transpose() * P;
    K = (R + gamma * BtP * B).ldlt().solve(gamma * BtP * A);
    const Matrix Acl = A - B * K;
    Matrix next = Q + K.transpose() * R * K + gamma * Acl.transpose() * P * Acl;
    next = 0.5 * (next + next.transpose());
    const double change = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (!P.allFinite()) throw NumericError("discounted_riccati: iteration diverged");
    if (change <= tol * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      const Matrix BtP2 = B.transpose() * P;
      K = (R + gamma * BtP2 * B).ldlt().solve(gamma * BtP2 * A);
      return {P, K};
    }
  }
  throw NumericError("discounted_riccati: no convergence (is (A, B) stabilisable?)");
}

}  // namespace demorl::regret

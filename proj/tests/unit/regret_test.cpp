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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "demorl/errors.hpp"
#include "demorl/regret/lq_oracle.hpp"
#include "demorl/regret/regret.hpp"
#include "test_support.hpp"

namespace demorl::regret {
namespace {

/// Minimizer of the stacked quadratic in the flattened sequence (U_0, ..., U_{H-1}).
Matrix stacked_optimum(const LqProblem& p, const Vector& x0, int horizon, double* cost) {
  const auto n = p.A.rows();
  const auto m = p.B.cols();
  const auto dim = horizon * m;
  // x_h = F_h x0 + G_h U.
  std::vector<Matrix> F(horizon + 1), G(horizon + 1);
  F[0] = Matrix::Identity(n, n);
  G[0] = Matrix::Zero(n, dim);
  for (int h = 0; h < horizon; ++h) {
    F[h + 1] = p.A * F[h];
    G[h + 1] = p.A * G[h];
    G[h + 1].middleCols(h * m, m) += p.B;
  }
  Matrix M = Matrix::Zero(dim, dim);
  Vector b = Vector::Zero(dim);
  double c = 0.0;
  double d = 1.0;
  for (int h = 0; h <= horizon; ++h) {
    const Matrix& W = h < horizon ? p.Q : p.terminal;
    const Vector f = F[h] * x0;
    M += d * G[h].transpose() * W * G[h];
    b += d * G[h].transpose() * W * f;
    c += d * f.dot(W * f);
    if (h < horizon) M.block(h * m, h * m, m, m) += d * p.R;
    d *= p.gamma;
  }
  const Vector u = -M.ldlt().solve(b);
  *cost = u.dot(M * u) + 2 * b.dot(u) + c;
  Matrix U(horizon, m);
  for (int h = 0; h < horizon; ++h) U.row(h) = u.segment(h * m, m).transpose();
  return U;
}

LqProblem random_problem(Rng& rng, int n, int m) {
  LqProblem p;
  p.A = testing::random_matrix(rng, n, n, 0.6);
  p.B = testing::random_matrix(rng, n, m);
  const Matrix L = testing::random_matrix(rng, n, n);
  p.Q = L * L.transpose() + 0.1 * Matrix::Identity(n, n);
  p.R = (0.5 + rng.uniform()) * Matrix::Identity(m, m);
  p.gamma = 0.9;
  const Matrix T = testing::random_matrix(rng, n, n);
  p.terminal = T * T.transpose();
  return p;
}

TEST(LqOracle, MatchesStackedLeastSquares) {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(3));
    const int m = 1 + static_cast<int>(rng.index(2));
    const auto p = random_problem(rng, n, m);
    const Vector x0 = testing::random_matrix(rng, n, 1, 2.0);
    const int H = 1 + static_cast<int>(rng.index(6));
    double ref_cost = 0;
    const Matrix ref = stacked_optimum(p, x0, H, &ref_cost);
    const auto sol = lq_oracle(p, x0, H);
    EXPECT_LT((sol.actions - ref).norm(), 1e-8 * (1 + ref.norm()));
    EXPECT_NEAR(sol.cost, ref_cost, 1e-8 * (1 + std::abs(ref_cost)));
    EXPECT_NEAR(lq_sequence_cost(p, x0, sol.actions), sol.cost, 1e-8 * (1 + std::abs(ref_cost)));
  }
}

TEST(LqOracle, NoRandomSequenceBeatsIt) {
  Rng rng(2);
  const auto p = random_problem(rng, 2, 1);
  Vector x0(2);
  x0 << 1.0, -1.0;
  const auto sol = lq_oracle(p, x0, 4);
  for (int i = 0; i < 2000; ++i) {
    const Matrix U = sol.actions + testing::random_matrix(rng, 4, 1, 0.5);
    EXPECT_GE(lq_sequence_cost(p, x0, U), sol.cost - 1e-10);
  }
}

TEST(LqOracle, RejectsIndefiniteCosts) {
  Rng rng(3);
  auto p = random_problem(rng, 2, 1);
  p.R = -Matrix::Identity(1, 1);
  EXPECT_THROW(p.validate(), ParameterError);
  p = random_problem(rng, 2, 1);
  p.B = Matrix::Zero(3, 1);
  EXPECT_THROW(p.validate(), DimensionError);
}

TEST(Riccati, FixedPointSatisfiesDiscountedEquation) {
  const auto params = envs::LqParams::defaults();
  const auto r = discounted_riccati(params.A, params.B, params.Q, params.R, params.gamma);
  const Matrix& A = params.A;
  const Matrix& B = params.B;
  const double g = params.gamma;
  const Matrix S = params.R + g * B.transpose() * r.P * B;
  const Matrix K = g * S.ldlt().solve(B.transpose() * r.P * A);
  const Matrix rhs = params.Q + g * A.transpose() * r.P * A -
                     g * A.transpose() * r.P * B * K;
  EXPECT_LT((r.P - rhs).norm(), 1e-8);
  EXPECT_LT((r.K - K).norm(), 1e-8);
  // With a P∞ terminal the finite-horizon oracle is the stationary feedback.
  LqProblem p{params.A, params.B, params.Q, params.R, params.gamma, r.P};
  Vector x0(2);
  x0 << 0.3, -2.0;
  const auto sol = lq_oracle(p, x0, 6);
  EXPECT_NEAR(sol.actions(0, 0), -(r.K * x0)(0), 1e-8);
  EXPECT_NEAR(sol.cost, x0.dot(r.P * x0), 1e-7);
}

TEST(HorizonGapBound, ZeroErrorIsExactlyZero) {
  EXPECT_EQ(horizon_gap_bound(3.0, 5.0, 0.9, 7, 0.0), 0.0);
}

TEST(HorizonGapBound, HandComputedExample) {
  // γ = 0.5, H = 2, c = V = 1: (2·0.5 + 2·0.25·2) ε = 2ε.
  EXPECT_NEAR(horizon_gap_bound(1.0, 1.0, 0.5, 2, 0.1), 0.2, 1e-15);
}

TEST(HorizonGapBound, ClosedFormMatchesSeries) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double c = rng.uniform(0, 5), v = rng.uniform(0, 5), g = rng.uniform(0.05, 0.99);
    const int H = 1 + static_cast<int>(rng.index(30));
    const double e = rng.uniform(0, 0.1);
    double series = 0;
    for (int h = 1; h < H; ++h) series += h * std::pow(g, h);
    const double expected = 2 * c * series * e + std::pow(g, H) * 2 * v * H * e;
    EXPECT_NEAR(horizon_gap_bound(c, v, g, H, e), expected, 1e-10 * (1 + expected));
  }
  EXPECT_THROW(horizon_gap_bound(1, 1, 1.0, 2, 0.1), ParameterError);
  EXPECT_THROW(horizon_gap_bound(1, 1, 0.5, 2, -0.1), ParameterError);
}

TEST(LoglogSlope, RecoversPowerLaw) {
  RegretReport r;
  for (int t = 1; t <= 1024; ++t) {
    RegretStep s;
    s.t = t;
    s.cumulative = 3.0 * std::pow(t, 0.5);
    r.steps.push_back(s);
  }
  EXPECT_NEAR(loglog_slope(r, 3, 10), 0.5, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope(r, 10, 12)));
}

RegretConfig quick_config() {
  RegretConfig c;
  c.steps = 128;
  c.rollouts = 50;
  c.gap_rollouts = 200;
  c.slope_min_exponent = 3;
  c.slope_max_exponent = 7;
  return c;
}

TEST(MeasureRegret, ExactModelWithOracleShiftHasTinyRegret) {
  RegretConfig cfg;
  cfg.model_error = 0.0;
  cfg.shift_gain_scale = 1.0;
  const auto r = measure_regret(envs::LqParams::defaults(), cfg, 3);
  ASSERT_EQ(r.steps.size(), 4096u);
  EXPECT_EQ(r.max_step_error, 0.0);
  EXPECT_LT(r.total_regret / cfg.steps, 1e-4);
  for (const auto& s : r.steps) {
    EXPECT_GE(s.regret, -1e-9);
    EXPECT_LT(s.comparator_gap, 1e-8);
  }
}

TEST(MeasureRegret, IsDeterministicAndWritesExactlyTRows) {
  const auto cfg = quick_config();
  const auto a = measure_regret(envs::LqParams::defaults(), cfg, 4);
  const auto b = measure_regret(envs::LqParams::defaults(), cfg, 4);
  EXPECT_EQ(a.total_regret, b.total_regret);
  EXPECT_GT(a.max_step_error, 0.0);
  EXPECT_TRUE(std::isfinite(a.slope));
  const auto dir = std::filesystem::temp_directory_path() /
                   ("demorl-regret-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  write_regret_csv(a, dir / "r.csv");
  write_regret_jsonl(a, dir / "r.jsonl");
  std::ifstream csv(dir / "r.csv");
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, cfg.steps);
  std::ifstream js(dir / "r.jsonl");
  std::string last;
  while (std::getline(js, line)) last = line;
  EXPECT_NE(last.find("\"slope\""), std::string::npos);
  EXPECT_NE(last.find("not computed"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(ModelGap, MeasuredGapWithinBound) {
  auto cfg = quick_config();
  cfg.model_error = 0.05;
  const auto samples = model_gap_samples(envs::LqParams::defaults(), cfg, 5);
  ASSERT_EQ(samples.size(), 200u);
  for (const auto& s : samples) {
    EXPECT_GT(s.max_step_error, 0.0);
    EXPECT_LE(std::abs(s.model_cost - s.true_cost), s.bound);
  }
}

TEST(RegretConfig, Validation) {
  RegretConfig c;
  c.slope_max_exponent = c.slope_min_exponent;
  EXPECT_THROW(c.validate(), ParameterError);
  EXPECT_EQ(step_schedule_from_string("constant"), StepSchedule::kConstant);
  EXPECT_THROW(step_schedule_from_string("cosine"), ParameterError);
}

}  // namespace
}  // namespace demorl::regret

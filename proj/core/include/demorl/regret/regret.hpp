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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "demorl/dmdmpc/planner.hpp"
#include "demorl/envs/lq.hpp"
#include "demorl/regret/lq_oracle.hpp"

namespace demorl::regret {

/// Upper bound on the H-step objective gap between a model with per-step
/// error e and the true dynamics:
///   2 c ((H-1)γ^{H+1} - Hγ^H + γ) / (1-γ)² e + γ^H 2 v H e
/// with c, v the cost and terminal value bounds.
double horizon_gap_bound(double cost_bound, double value_bound, double gamma, int horizon, double step_error);

enum class StepSchedule { kConstant, kInverseSqrt };
std::string_view to_string(StepSchedule s);
StepSchedule step_schedule_from_string(std::string_view name);

struct RegretConfig {
  int steps = 4096;  // T
  int horizon = 5;
  int rollouts = 100;
  double elite_fraction = 0.1;
  /// Step size α_t = alpha (constant) or alpha / sqrt(t) (inverse-sqrt), t >= 1.
  double alpha = 1.0;
  StepSchedule step_schedule = StepSchedule::kInverseSqrt;
  double std_scale = 0.2;
  dmdmpc::Aggregation aggregation = dmdmpc::Aggregation::kExpUtility;
  /// Frobenius norm of the model perturbation [δA δB].
  double model_error = 0.01;
  /// Shift policy u = -scale K∞ x; scale 1 reproduces the oracle.
  double shift_gain_scale = 0.5;
  int gap_rollouts = 1000;
  /// Half-width of the start-state box for the model-gap rollouts.
  double gap_state_box = 1.0;
  int slope_min_exponent = 5;
  int slope_max_exponent = 12;

  void validate() const;
};

struct RegretStep {
  int t = 0;
  double model_cost = 0.0;   // shifted plan μ̃_t on the perturbed model
  double true_cost = 0.0;    // executed plan μ_t on the true dynamics
  double oracle_cost = 0.0;  // exact optimum from x_t
  double regret = 0.0;    // true_cost - oracle_cost
  double cumulative = 0.0;
  double comparator_gap = 0.0;  // |μ*_t - μ̃_t|_F
  double alpha = 0.0;
  double gradient_norm = 0.0;
};

struct RegretReport {
  std::vector<RegretStep> steps;
  double comparator_path_length = 0.0;
  double total_regret = 0.0;
  double cost_bound = 0.0;
  double value_bound = 0.0;
  double gamma = 0.0;
  int horizon = 0;
  double max_step_error = 0.0;  // max one-step prediction error over visited pairs
  double max_gradient_norm = 0.0;      // max sampled objective-gradient norm
  double slope = 0.0;    // log total regret vs log T
  std::uint64_t seed = 0;
};

/// Problem instance assembled from LQ parameters: true and perturbed models,
/// the discounted Riccati terminal value and the bound constants.
struct RegretInstance {
  envs::LinearQuadratic true_env;
  envs::LinearQuadratic model_env;
  LqProblem problem;  // true dynamics with terminal P∞
  RiccatiFixedPoint riccati;
  double cost_bound = 0.0;
  double value_bound = 0.0;
};

RegretInstance make_instance(const envs::LqParams& params, double model_error, Rng& rng);

/// Closed-loop DMD-MPC on the true LQ system for `steps` decision steps, with
/// the plan computed on the perturbed model. The shift policy defaults to the
/// scaled stationary gain.
RegretReport measure_regret(const envs::LqParams& params, const RegretConfig& config,
                            std::uint64_t seed,
                            const std::optional<dmdmpc::PolicyFn>& shift_policy = std::nullopt);

/// Least-squares slope of log total regret against log T at T = 2^lo, ..., 2^hi,
/// read off the cumulative series. NaN if fewer than two positive points.
double loglog_slope(const RegretReport& report, int lo_exponent, int hi_exponent);

struct ModelGapSample {
  Vector state;
  double model_cost = 0.0;
  double true_cost = 0.0;
  double bound = 0.0;
  double max_step_error = 0.0;
};

/// Open-loop random sequences from random start states, each scored on the
/// perturbed model and on the true dynamics. The step error is the largest one-step
/// error seen over the visited state-action pairs of that rollout.
std::vector<ModelGapSample> model_gap_samples(const envs::LqParams& params,
                                              const RegretConfig& config, std::uint64_t seed);

void write_regret_jsonl(const RegretReport& report, const std::filesystem::path& path);
void write_regret_csv(const RegretReport& report, const std::filesystem::path& path);

}  // namespace demorl::regret

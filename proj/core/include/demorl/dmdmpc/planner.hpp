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

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "demorl/dmdmpc/models.hpp"
#include "demorl/envs/environment.hpp"
#include "demorl/numerics/rng.hpp"

namespace demorl::dmdmpc {

enum class Aggregation { kExpUtility, kCostProportional, kUniform };

std::string_view to_string(Aggregation a);
Aggregation aggregation_from_string(std::string_view name);

struct PlannerConfig {
  int horizon = 5;
  int rollouts = 100;
  double elite_fraction = 0.1;
  /// Mirror-descent step size.
  double alpha = 0.5;
  /// Sampling std as a fraction of the action half-range.
  double std_scale = 0.2;
  Aggregation aggregation = Aggregation::kExpUtility;
  /// Fixed exp-utility temperature; by default the elite cost spread is used.
  std::optional<double> temperature;
  int inner_iters = 1;
  double gamma = 0.99;

  void validate() const;
};

/// Deterministic policy evaluated on a batch of states (columns).
using PolicyFn = std::function<Matrix(const Matrix& states)>;
/// Terminal value V(x) for a batch of states; may draw from the generator.
using ValueFn = std::function<Vector(const Matrix& states, Rng& rng)>;

/// Mean sequence μ (H x m, one row per step) with the shared per-dimension std.
struct ControlPlan {
  Matrix means;
  Vector std;
  double alpha = 0.0;
};

struct ShiftResult {
  Matrix means;   // H x m, μ̃_h = π(x_h)
  Matrix states;  // (H+1) x n visited model states
  bool truncated = false;
};

/// Rolls the policy forward on one model member from x0 and records its
/// actions. If the model state turns non-finite, the remaining rows repeat the
/// last finite action and `truncated` is set.
ShiftResult shift_plan(const PolicyFn& policy, const DynamicsModel& model, int member,
                       const Vector& x0, int horizon);

struct RolloutBatch {
  int horizon = 0;
  int count = 0;
  std::vector<Matrix> states;   // H+1 entries, each n x M
  std::vector<Matrix> actions;  // H entries, each m x M
  Matrix rewards;               // H x M
  Vector terminal_values;       // M
  std::vector<int> members;     // M
  Vector costs;                 // M, NaN for discarded trajectories
  std::vector<bool> valid;
  int dropped = 0;

  /// H x m action sequence of trajectory i.
  Matrix sequence(int i) const;
};

/// Σ_h γ^h (-r_h) + γ^H (-v_H).
double trajectory_cost(const Vector& rewards, double terminal_value, double gamma);

/// Samples M trajectories u_h = clip(μ̃_h + std ⊙ z_h) on model members drawn
/// uniformly from `members` (one per trajectory) and scores them. Throws
/// PlannerDegeneracyError if more than half are non-finite.
RolloutBatch rollout_batch(const Matrix& means, const Vector& std, const DynamicsModel& model,
                           const std::vector<int>& members, const Vector& x0, int count,
                           double gamma, const ValueFn& value, const envs::EnvSpec& spec,
                           Rng& rng);

struct EliteSet {
  std::vector<int> indices;  // ascending cost, ties by lower index
  double threshold = 0.0;    // largest selected cost
};

/// Number of elites for M samples: max(1, floor(p M)).
int elite_count(int samples, double fraction);
/// The elite_count smallest finite costs. Throws PlannerDegeneracyError when no
/// cost is finite.
EliteSet select_elites(const Vector& costs, double fraction);

/// Weighted mean of the elite sequences. Returns the H x m aggregate.
Matrix aggregate_elites(const std::vector<Matrix>& sequences, const Vector& costs,
                        Aggregation mode, std::optional<double> temperature = std::nullopt);
Matrix aggregate_elites(const RolloutBatch& batch, const std::vector<int>& elites,
                        Aggregation mode, std::optional<double> temperature = std::nullopt);
/// Normalized aggregation weights, in the order of `costs`.
Vector aggregation_weights(const Vector& costs, Aggregation mode,
                           std::optional<double> temperature = std::nullopt);

/// (1 - α) μ̃ + α g without clipping.
Matrix dmd_mix(const Matrix& shifted, const Matrix& aggregate, double alpha);
/// dmd_mix clipped row-wise to the action bounds.
Matrix dmd_update(const Matrix& shifted, const Matrix& aggregate, double alpha,
                  const envs::EnvSpec& spec);

/// Monte-Carlo mean of C_i (U_i - μ̃) over the given samples.
Matrix objective_gradient(const Matrix& shifted, const std::vector<Matrix>& sequences,
                          const Vector& costs);
/// Same estimate over the retained trajectories of a batch.
Matrix objective_gradient(const Matrix& shifted, const RolloutBatch& batch);

/// Open-loop cost of an action sequence on one member from x0.
double sequence_cost(const DynamicsModel& model, int member, const Vector& x0,
                     const Matrix& means, double gamma, const ValueFn& value, Rng& rng);

struct PlanResult {
  ControlPlan plan;             // μ_t
  Matrix shifted;               // μ̃_t
  bool shift_truncated = false;
  int dropped = 0;
  double mean_elite_cost = 0.0;
  double elite_threshold = 0.0;
  bool zero_sum_fallback = false;
  /// μ_t re-simulated on one elite member; stops early at a non-finite step.
  std::vector<envs::Transition> transitions;
};

/// shift -> rollouts -> elites -> aggregate -> mirror-descent update, repeated
/// `inner_iters` times with μ̃ <- μ, then re-simulation of μ for replay data.
PlanResult plan(const Vector& x0, const PolicyFn& policy, const ValueFn& value,
                const DynamicsModel& model, const PlannerConfig& config,
                const envs::EnvSpec& spec, Rng& rng);

}  // namespace demorl::dmdmpc

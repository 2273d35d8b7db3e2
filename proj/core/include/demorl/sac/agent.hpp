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

#include <optional>
#include <string>
#include <vector>

#include "demorl/buffers/replay_buffer.hpp"
#include "demorl/envs/environment.hpp"
#include "demorl/numerics/adam.hpp"
#include "demorl/numerics/archive.hpp"
#include "demorl/numerics/mlp.hpp"

namespace demorl::sac {

struct SacConfig {
  std::vector<int> hidden = {256, 256};
  Activation activation = Activation::kRelu;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double temperature_lr = 3e-4;
  double tau = 0.005;
  double gamma = 0.99;
  /// Defaults to -action_dim.
  std::optional<double> target_entropy;
  double init_temperature = 1.0;
  bool learn_temperature = true;
  int batch_size = 256;
  double log_std_min = -20.0;
  double log_std_max = 2.0;

  void validate() const;
};

struct ActionSample {
  Vector action;    // within the action bounds
  double log_prob = 0.0;
  Vector pre_squash_mean;
};

/// Squashed-Gaussian actor, twin critics with Polyak-averaged targets and a
/// learned entropy temperature.
///
/// The actor outputs (mean, log-std) of a Gaussian over pre-squash actions;
/// a = center + half_range ⊙ tanh(z). Critics see the state and the action
/// rescaled to [-1, 1].
struct SacAgent {
  SacConfig config;
  int state_dim = 0;
  int action_dim = 0;
  Vector action_center;
  Vector action_half_range;
  double target_entropy = 0.0;

  MlpParams actor;
  MlpParams critic1;
  MlpParams critic2;
  MlpParams target1;
  MlpParams target2;
  double log_temperature = 0.0;

  OptimState actor_opt;
  OptimState critic1_opt;
  OptimState critic2_opt;
  OptimState temperature_opt;

  double temperature() const;
  void save(Archive& ar, const std::string& prefix) const;
  static SacAgent load(const Archive& ar, const std::string& prefix, SacConfig config);
};

SacAgent make_agent(const envs::EnvSpec& spec, SacConfig config, Rng& rng);

/// Squashed sample for given pre-squash Gaussian parameters and noise, with
/// its change-of-variables log density. Columns are samples.
struct SquashedBatch {
  Matrix actions;      // m x B, environment units
  Matrix normalized;   // m x B, tanh(z) in (-1, 1)
  Matrix pre_squash;   // z = mean + std ⊙ eps
  Vector log_prob;     // B
};
SquashedBatch squash_sample(const Matrix& mean, const Matrix& log_std, const Matrix& eps,
                            const Vector& center, const Vector& half_range);

/// log density of the squashed Gaussian at pre-squash point z (scalar action
/// case helpers for tests live in the test tree).
double squashed_log_prob(const Vector& z, const Vector& mean, const Vector& log_std,
                         const Vector& half_range);

/// Actor head split: mean rows and clamped log-std rows of the raw output.
void actor_head(const SacAgent& agent, const Matrix& raw, Matrix& mean, Matrix& log_std);

ActionSample actor_sample(const SacAgent& agent, const Vector& x, Rng& rng,
                          bool deterministic);
/// Deterministic actions (squashed means) for a batch of states.
Matrix actor_mean_batch(const SacAgent& agent, const Matrix& states);
/// Stochastic actions for a batch of states.
SquashedBatch actor_sample_batch(const SacAgent& agent, const Matrix& states, Rng& rng);

/// min(Q1, Q2)(x, u) for a batch; `actions` in environment units.
Vector min_q(const SacAgent& agent, const Matrix& states, const Matrix& actions);

/// V(x) = min(Q1, Q2)(x, u) - α log π(u|x), u one fresh actor sample per state.
double value_estimate(const SacAgent& agent, const Vector& x, Rng& rng);
Vector value_estimate_batch(const SacAgent& agent, const Matrix& states, Rng& rng);
Vector value_estimate_batch(const SacAgent& agent, const Matrix& states, const Matrix& eps);

struct CriticGrads {
  double loss = 0.0;
  MlpGrads critic1;
  MlpGrads critic2;
};
/// 0.5 Σ_i mean((Q_i(x, u) - y)²), y = r + γ(1 - d)(min Q̄(x', u') - α log π(u'|x'))
/// with u' = squash(actor(x'), next_eps). Targets carry no gradient.
CriticGrads critic_loss(const SacAgent& agent, const buffers::TransitionBatch& batch,
                        const Matrix& next_eps);

struct ActorGrads {
  double loss = 0.0;
  MlpGrads actor;
  double mean_log_prob = 0.0;
};
/// mean(α log π(u|x) - min(Q1, Q2)(x, u)), u = squash(actor(x), eps).
ActorGrads actor_loss(const SacAgent& agent, const Matrix& states, const Matrix& eps);

/// Loss -log α · mean(log π + target entropy) and its derivative in log α.
struct TemperatureGrad {
  double loss = 0.0;
  double grad = 0.0;
};
TemperatureGrad temperature_loss(const SacAgent& agent, double mean_log_prob);

struct SacLosses {
  double critic = 0.0;
  double actor = 0.0;
  double temperature = 0.0;
};

/// One gradient step on critics, actor and temperature followed by the soft
/// target update. All three losses are evaluated on the pre-update parameters;
/// a non-finite loss or gradient throws NumericError and leaves the agent
/// unchanged.
SacLosses sac_update(SacAgent& agent, const buffers::TransitionBatch& batch, Rng& rng);

}  // namespace demorl::sac

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
#include <memory>
#include <vector>

#include "demorl/buffers/replay_buffer.hpp"
#include "demorl/config/run_config.hpp"
#include "demorl/model/ensemble.hpp"
#include "demorl/numerics/archive.hpp"
#include "demorl/sac/agent.hpp"

namespace demorl::trainer {

struct EvalResult {
  std::vector<double> returns;
  double mean_return = 0.0;
  double std_return = 0.0;
  double reward_per_step = 0.0;
  /// Mean end-effector error over all evaluation steps; NaN for tasks
  /// without a tracking target.
  double tracking_error = 0.0;
};

/// Deterministic (squashed-mean) episodes of full horizon length.
EvalResult evaluate(const envs::Environment& env, const sac::SacAgent& agent, int episodes,
                    Rng rng);

struct EpochReport {
  int epoch = 0;
  std::uint64_t env_steps = 0;  // cumulative real-environment steps
  EvalResult eval;
  double train_return = 0.0;    // mean over episodes finished this epoch, NaN if none
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double temperature_loss = 0.0;
  double temperature = 0.0;
  int sac_updates = 0;
  bool model_trained = false;
  double model_train_loss = 0.0;
  double model_val_loss = 0.0;  // mean over elite members
  int horizon = 0;
  int mpc_budget = 0;
  int mpc_transitions = 0;
  int planner_calls = 0;
  double mean_elite_cost = 0.0;
  int dropped_trajectories = 0;
  int shift_truncations = 0;
  bool planner_degenerate = false;
  double mix_ratio = 0.0;
  double wall_time = 0.0;  // seconds; reported in events, not in metrics.csv
};

/// One training run: environment, agent, model, buffers and the named random
/// streams, advanced one epoch at a time.
class Trainer {
 public:
  Trainer(config::RunConfig config, std::uint64_t seed);

  /// Collects steps_per_epoch real transitions, trains the model, fills the
  /// planner buffer up to the scheduled budget, runs the SAC updates on the
  /// mixed sampler and evaluates.
  EpochReport run_epoch();

  int epoch() const { return epoch_; }
  std::uint64_t env_steps() const { return env_steps_; }
  std::uint64_t seed() const { return seed_; }
  const config::RunConfig& config() const { return config_; }
  const envs::Environment& env() const { return *env_; }
  const sac::SacAgent& agent() const { return agent_; }
  const model::EnsembleModel& model() const { return model_; }
  const buffers::ReplayBuffer& env_buffer() const { return env_buffer_; }
  const buffers::ReplayBuffer& mpc_buffer() const { return mpc_buffer_; }

  Archive checkpoint() const;
  /// Rebuilds a trainer from a checkpoint written with the same configuration.
  static Trainer restore(config::RunConfig config, const Archive& ar);

 private:
  void collect(EpochReport& report);
  void plan_block(EpochReport& report);
  void update_agent(EpochReport& report);

  config::RunConfig config_;
  std::uint64_t seed_;
  std::unique_ptr<envs::Environment> env_;
  Rng env_rng_;
  Rng explore_rng_;
  Rng agent_rng_;
  Rng model_rng_;
  Rng planner_rng_;
  Rng sampler_rng_;
  sac::SacAgent agent_;
  model::EnsembleModel model_;
  buffers::ReplayBuffer env_buffer_;
  buffers::ReplayBuffer mpc_buffer_;
  int epoch_ = 0;
  std::uint64_t env_steps_ = 0;
  Vector episode_state_;
  int episode_step_ = 0;
  double episode_return_ = 0.0;
};

}  // namespace demorl::trainer

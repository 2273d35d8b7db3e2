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

#include <cstddef>
#include <string>
#include <vector>

#include "demorl/buffers/replay_buffer.hpp"
#include "demorl/numerics/adam.hpp"
#include "demorl/numerics/archive.hpp"
#include "demorl/numerics/mlp.hpp"

namespace demorl::model {

struct EnsembleConfig {
  int members = 5;
  std::vector<int> hidden = {200, 200};
  Activation activation = Activation::kRelu;
  /// Passes over each member's bootstrap sample per training call.
  int epochs = 5;
  /// Upper bound on minibatch updates per member per call; 0 means no bound.
  int max_updates = 0;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double validation_fraction = 0.1;
  std::size_t min_transitions = 250;
  double std_floor = 1e-6;
  /// Continue from the previous parameters and optimizer moments.
  bool warm_start = true;
  /// Members output a mean and a log-variance per target and are trained by
  /// Gaussian negative log-likelihood; predictions use the mean.
  bool gaussian_nll = false;

  void validate() const;
};

/// Per-dimension z-score statistics of the (x, u) network input.
struct Normalizer {
  Vector mean;
  Vector std;

  static Normalizer identity(Eigen::Index dim);
  static Normalizer fit(const Matrix& inputs, double std_floor);
  Matrix apply(const Matrix& inputs) const;
};

struct ModelPrediction {
  Vector delta;       // predicted x' - x
  double reward = 0.0;
  Vector next_state;  // x + delta
};

enum class TrainStatus { kTrained, kDeferred };

struct TrainReport {
  TrainStatus status = TrainStatus::kDeferred;
  std::vector<double> validation_losses;
  double train_loss = 0.0;  // mean over members of the final-epoch loss
  int updates = 0;          // minibatch steps per member
};

/// K independently trained networks mapping (x, u) to (Δx, r).
class EnsembleModel {
 public:
  EnsembleModel(int state_dim, int action_dim, EnsembleConfig config, Rng& rng);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  int size() const { return static_cast<int>(members_.size()); }
  const EnsembleConfig& config() const { return config_; }
  bool trained() const { return trained_; }

  const MlpParams& member(int k) const { return members_.at(k); }
  MlpParams& member(int k) { return members_.at(k); }
  const Normalizer& normalizer() const { return normalizer_; }
  void set_normalizer(Normalizer n);
  const std::vector<double>& validation_losses() const { return validation_losses_; }
  void set_validation_losses(std::vector<double> losses);
  const std::vector<int>& elites() const { return elites_; }

  ModelPrediction predict(int k, const Vector& x, const Vector& u) const;
  /// Columns of `states` and `actions` are samples; returns the (n+1) x B
  /// matrix of (Δx, r) means. Non-finite columns are passed through.
  Matrix predict_batch(int k, const Matrix& states, const Matrix& actions) const;

  void save(Archive& ar, const std::string& prefix) const;
  static EnsembleModel load(const Archive& ar, const std::string& prefix,
                            EnsembleConfig config);

 private:
  friend TrainReport train_ensemble(EnsembleModel&, const buffers::TransitionBatch&, Rng&);
  EnsembleModel() = default;
  void init_members(Rng& rng);

  int state_dim_ = 0;
  int action_dim_ = 0;
  EnsembleConfig config_;
  std::vector<MlpParams> members_;
  std::vector<OptimState> optims_;
  Normalizer normalizer_;
  std::vector<double> validation_losses_;
  std::vector<int> elites_;
  bool trained_ = false;
};

/// Indices of the ceil(K/2) smallest losses, ties broken by lower index,
/// returned in ascending index order.
std::vector<int> select_members(const std::vector<double>& validation_losses);
std::vector<int> select_members(const EnsembleModel& model);

/// Trains every member on its own bootstrap resample with a held-out
/// validation split, refits the normalizer and the elite set. Returns a
/// deferred report (model untouched) while fewer than `min_transitions`
/// samples are available.
TrainReport train_ensemble(EnsembleModel& model, const buffers::TransitionBatch& data,
                           Rng& rng);
TrainReport train_ensemble(EnsembleModel& model, const buffers::ReplayBuffer& buffer,
                           Rng& rng);

/// Mean squared error of member k over the samples, averaged over the n+1
/// output dimensions.
double evaluate_mse(const EnsembleModel& model, int k, const buffers::TransitionBatch& data);

}  // namespace demorl::model

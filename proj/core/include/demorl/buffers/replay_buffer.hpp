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
#include <filesystem>
#include <string>

#include "demorl/envs/environment.hpp"
#include "demorl/numerics/archive.hpp"
#include "demorl/numerics/rng.hpp"

namespace demorl::buffers {

/// Column-per-sample batch of transitions.
struct TransitionBatch {
  Matrix states;       // n x B
  Matrix actions;      // m x B
  Vector rewards;      // B
  Matrix next_states;  // n x B
  Vector dones;        // B, 1.0 for terminal transitions

  Eigen::Index size() const { return rewards.size(); }
  void resize(int state_dim, int action_dim, Eigen::Index batch);
};

/// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int state_dim, int action_dim);

  /// Stores the transition. Non-finite transitions are rejected with a logged
  /// warning and the call returns false.
  bool push(const envs::Transition& t);
  void clear();

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  std::size_t rejected() const { return rejected_; }

  /// i-th stored transition, 0 being the oldest.
  envs::Transition at(std::size_t i) const;
  /// Writes `count` uniformly drawn transitions into columns
  /// [offset, offset + count) of `out`.
  void sample_into(Rng& rng, Eigen::Index count, TransitionBatch& out,
                   Eigen::Index offset) const;
  TransitionBatch sample(Eigen::Index batch, Rng& rng) const;
  /// Every stored transition, oldest first.
  TransitionBatch all() const;

  void save(Archive& ar, const std::string& prefix) const;
  static ReplayBuffer load(const Archive& ar, const std::string& prefix);
  void dump(const std::filesystem::path& path) const;

 private:
  std::size_t slot(std::size_t i) const;
  void reserve_for(std::size_t n);

  std::size_t capacity_;
  int state_dim_;
  int action_dim_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  std::size_t rejected_ = 0;
  Matrix states_;
  Matrix actions_;
  Vector rewards_;
  Matrix next_states_;
  Vector dones_;
};

/// Share of planner data in a mixed batch when both buffers are sampled in
/// proportion to their volume: mpc / (mpc + env_steps).
double mix_ratio(std::size_t mpc_size, std::size_t env_steps_per_epoch);

/// ceil(ρ·batch) draws from `mpc`, the rest from `env`, each uniform within its
/// buffer. An empty buffer hands its share to the other one; both empty throws
/// SamplingError.
TransitionBatch sample_mixed(const ReplayBuffer& env, const ReplayBuffer& mpc,
                             Eigen::Index batch, double rho, Rng& rng);

/// Number of planner draws sample_mixed takes for a given ratio.
Eigen::Index mpc_share(Eigen::Index batch, double rho);

}  // namespace demorl::buffers

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

#include "demorl/buffers/replay_buffer.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "demorl/errors.hpp"

namespace demorl::buffers {

void TransitionBatch::resize(int state_dim, int action_dim, Eigen::Index batch) {
  states.resize(state_dim, batch);
  actions.resize(action_dim, batch);
  rewards.resize(batch);
  next_states.resize(state_dim, batch);
  dones.resize(batch);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim, int action_dim)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
  if (capacity == 0) throw ParameterError("ReplayBuffer: capacity must be positive");
  if (state_dim < 1 || action_dim < 1) {
    throw DimensionError("ReplayBuffer: dimensions must be positive");
  }
}

void ReplayBuffer::reserve_for(std::size_t n) {
  const auto have = static_cast<std::size_t>(rewards_.size());
  if (n <= have) return;
  const auto grown = static_cast<Eigen::Index>(
      std::min(capacity_, std::max<std::size_t>({n, 2 * have, 1024})));
  states_.conservativeResize(state_dim_, grown);
  actions_.conservativeResize(action_dim_, grown);
  rewards_.conservativeResize(grown);
  next_states_.conservativeResize(state_dim_, grown);
  dones_.conservativeResize(grown);
}

bool ReplayBuffer::push(const envs::Transition& t) {
  if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_ ||
      t.action.size() != action_dim_) {
    throw DimensionError("ReplayBuffer: transition shape mismatch");
  }
  if (!t.finite()) {
    ++rejected_;
    spdlog::warn("replay buffer rejected a non-finite transition ({} so far)", rejected_);
    return false;
  }
  reserve_for(size_ + 1);
  const auto c = static_cast<Eigen::Index>(cursor_);
  states_.col(c) = t.state;
  actions_.col(c) = t.action;
  rewards_[c] = t.reward;
  next_states_.col(c) = t.next_state;
  dones_[c] = t.done ? 1.0 : 0.0;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  return true;
}

void ReplayBuffer::clear() {
  size_ = 0;
  cursor_ = 0;
}

std::size_t ReplayBuffer::slot(std::size_t i) const {
  const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
  return (oldest + i) % capacity_;
}

envs::Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ParameterError("ReplayBuffer: index out of range");
  const auto s = static_cast<Eigen::Index>(slot(i));
  return {states_.col(s), actions_.col(s), rewards_[s], next_states_.col(s),
          dones_[s] != 0.0};
}

void ReplayBuffer::sample_into(Rng& rng, Eigen::Index count, TransitionBatch& out,
                               Eigen::Index offset) const {
  if (count == 0) return;
  if (size_ == 0) throw SamplingError("cannot sample from an empty buffer");
  for (Eigen::Index j = 0; j < count; ++j) {
    // Occupied slots are always [0, size) in storage, whatever the cursor.
    const auto s = static_cast<Eigen::Index>(rng.index(size_));
    const Eigen::Index c = offset + j;
    out.states.col(c) = states_.col(s);
    out.actions.col(c) = actions_.col(s);
    out.rewards[c] = rewards_[s];
    out.next_states.col(c) = next_states_.col(s);
    out.dones[c] = dones_[s];
  }
}

TransitionBatch ReplayBuffer::sample(Eigen::Index batch, Rng& rng) const {
  TransitionBatch out;
  out.resize(state_dim_, action_dim_, batch);
  sample_into(rng, batch, out, 0);
  return out;
}

TransitionBatch ReplayBuffer::all() const {
  TransitionBatch out;
  const auto n = static_cast<Eigen::Index>(size_);
  out.resize(state_dim_, action_dim_, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto s = static_cast<Eigen::Index>(slot(static_cast<std::size_t>(i)));
    out.states.col(i) = states_.col(s);
    out.actions.col(i) = actions_.col(s);
    out.rewards[i] = rewards_[s];
    out.next_states.col(i) = next_states_.col(s);
    out.dones[i] = dones_[s];
  }
  return out;
}

void ReplayBuffer::save(Archive& ar, const std::string& prefix) const {
  const std::uint64_t meta[] = {capacity_, static_cast<std::uint64_t>(state_dim_),
                                static_cast<std::uint64_t>(action_dim_), size_, cursor_,
                                rejected_};
  ar.put_u64(prefix + "meta", meta);
  const auto n = static_cast<Eigen::Index>(size_);
  ar.put(prefix + "states", Matrix(states_.leftCols(n)));
  ar.put(prefix + "actions", Matrix(actions_.leftCols(n)));
  ar.put(prefix + "rewards", Matrix(rewards_.head(n)));
  ar.put(prefix + "next_states", Matrix(next_states_.leftCols(n)));
  ar.put(prefix + "dones", Matrix(dones_.head(n)));
}

ReplayBuffer ReplayBuffer::load(const Archive& ar, const std::string& prefix) {
  const auto meta = ar.u64s(prefix + "meta");
  if (meta.size() != 6) throw IntegrityError("buffer metadata has the wrong length");
  ReplayBuffer b(meta[0], static_cast<int>(meta[1]), static_cast<int>(meta[2]));
  b.size_ = meta[3];
  b.cursor_ = meta[4];
  b.rejected_ = meta[5];
  b.states_ = ar.matrix(prefix + "states");
  b.actions_ = ar.matrix(prefix + "actions");
  b.rewards_ = ar.vector(prefix + "rewards");
  b.next_states_ = ar.matrix(prefix + "next_states");
  b.dones_ = ar.vector(prefix + "dones");
  const auto n = static_cast<Eigen::Index>(b.size_);
  if (b.size_ > b.capacity_ || b.cursor_ >= b.capacity_ || b.states_.cols() != n ||
      b.states_.rows() != b.state_dim_ || b.actions_.cols() != n ||
      b.actions_.rows() != b.action_dim_ || b.rewards_.size() != n ||
      b.next_states_.cols() != n || b.dones_.size() != n) {
    throw IntegrityError("buffer arrays disagree with its metadata");
  }
  return b;
}

void ReplayBuffer::dump(const std::filesystem::path& path) const {
  Archive ar;
  save(ar, "");
  ar.save(path);
}

double mix_ratio(std::size_t mpc_size, std::size_t env_steps_per_epoch) {
  const double total = static_cast<double>(mpc_size + env_steps_per_epoch);
  return total > 0 ? static_cast<double>(mpc_size) / total : 0.0;
}

Eigen::Index mpc_share(Eigen::Index batch, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ParameterError("mix ratio must lie in [0, 1]");
  // The small slack keeps products like 0.1 * 10 from rounding up to 2.
  const auto n = static_cast<Eigen::Index>(std::ceil(rho * static_cast<double>(batch) - 1e-9));
  return std::clamp<Eigen::Index>(n, 0, batch);
}

TransitionBatch sample_mixed(const ReplayBuffer& env, const ReplayBuffer& mpc,
                             Eigen::Index batch, double rho, Rng& rng) {
  if (batch < 1) throw ParameterError("sample_mixed: batch must be positive");
  if (env.empty() && mpc.empty()) throw SamplingError("both replay buffers are empty");
  if (env.state_dim() != mpc.state_dim() || env.action_dim() != mpc.action_dim()) {
    throw DimensionError("sample_mixed: buffers have different shapes");
  }
  Eigen::Index from_mpc = mpc_share(batch, rho);
  if (mpc.empty()) from_mpc = 0;
  if (env.empty()) from_mpc = batch;
  TransitionBatch out;
  out.resize(env.state_dim(), env.action_dim(), batch);
  mpc.sample_into(rng, from_mpc, out, 0);
  env.sample_into(rng, batch - from_mpc, out, from_mpc);
  return out;
}

}  // namespace demorl::buffers

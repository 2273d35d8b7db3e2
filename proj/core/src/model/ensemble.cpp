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

#include "demorl/model/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "demorl/errors.hpp"

namespace demorl::model {
namespace {

constexpr double kMinLogVar = -10.0;
constexpr double kMaxLogVar = 4.0;

Matrix stack_inputs(const Matrix& states, const Matrix& actions) {
  Matrix in(states.rows() + actions.rows(), states.cols());
  in.topRows(states.rows()) = states;
  in.bottomRows(actions.rows()) = actions;
  return in;
}

Matrix stack_targets(const buffers::TransitionBatch& data) {
  Matrix t(data.states.rows() + 1, data.size());
  t.topRows(data.states.rows()) = data.next_states - data.states;
  t.bottomRows(1) = data.rewards.transpose();
  return t;
}

Matrix gather(const Matrix& m, const std::vector<Eigen::Index>& idx, std::size_t begin,
              std::size_t end) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(end - begin));
  for (std::size_t j = begin; j < end; ++j) {
    out.col(static_cast<Eigen::Index>(j - begin)) = m.col(idx[j]);
  }
  return out;
}

/// Loss and output gradient for one minibatch.
double loss_and_grad(const Matrix& out, const Matrix& target, bool nll, Matrix& grad) {
  const Eigen::Index d = target.rows();
  const auto b = static_cast<double>(target.cols());
  const double scale = 1.0 / (b * static_cast<double>(d));
  grad.resizeLike(out);
  if (!nll) {
    const Matrix err = out - target;
    grad = 2.0 * scale * err;
    return scale * err.squaredNorm();
  }
  double loss = 0.0;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      const double raw = out(d + r, c);
      const double lv = std::clamp(raw, kMinLogVar, kMaxLogVar);
      const double inv = std::exp(-lv);
      const double e = out(r, c) - target(r, c);
      loss += scale * (e * e * inv + lv);
      grad(r, c) = 2.0 * scale * e * inv;
      grad(d + r, c) = (raw == lv) ? scale * (1.0 - e * e * inv) : 0.0;
    }
  }
  return loss;
}

}  // namespace

void EnsembleConfig::validate() const {
  if (members < 2) throw ParameterError("ensemble needs at least two members");
  if (hidden.empty() || *std::min_element(hidden.begin(), hidden.end()) < 1) {
    throw ParameterError("ensemble hidden widths must be positive");
  }
  if (epochs < 0 || max_updates < 0 || batch_size < 1 || !(learning_rate > 0)) {
    throw ParameterError("bad ensemble optimisation settings");
  }
  if (!(validation_fraction > 0 && validation_fraction < 1)) {
    throw ParameterError("validation fraction must lie in (0, 1)");
  }
}

Normalizer Normalizer::identity(Eigen::Index dim) {
  return {Vector::Zero(dim), Vector::Ones(dim)};
}

Normalizer Normalizer::fit(const Matrix& inputs, double std_floor) {
  Normalizer n;
  n.mean = inputs.rowwise().mean();
  const Matrix centered = inputs.colwise() - n.mean;
  n.std = (centered.rowwise().squaredNorm() / static_cast<double>(inputs.cols()))
              .cwiseSqrt();
  // Near-constant inputs are centred but left unscaled.
  for (Eigen::Index i = 0; i < n.std.size(); ++i) {
    if (!(n.std[i] >= std_floor)) n.std[i] = 1.0;
  }
  return n;
}

Matrix Normalizer::apply(const Matrix& inputs) const {
  return (inputs.colwise() - mean).array().colwise() / std.array();
}

EnsembleModel::EnsembleModel(int state_dim, int action_dim, EnsembleConfig config, Rng& rng)
    : state_dim_(state_dim), action_dim_(action_dim), config_(std::move(config)) {
  if (state_dim < 1 || action_dim < 1) throw DimensionError("ensemble: bad dimensions");
  config_.validate();
  init_members(rng);
  normalizer_ = Normalizer::identity(state_dim_ + action_dim_);
  validation_losses_.assign(members_.size(), 0.0);
  elites_ = select_members(validation_losses_);
}

void EnsembleModel::init_members(Rng& rng) {
  std::vector<int> sizes{state_dim_ + action_dim_};
  sizes.insert(sizes.end(), config_.hidden.begin(), config_.hidden.end());
  sizes.push_back((config_.gaussian_nll ? 2 : 1) * (state_dim_ + 1));
  AdamConfig adam;
  adam.learning_rate = config_.learning_rate;
  members_.clear();
  optims_.clear();
  for (int k = 0; k < config_.members; ++k) {
    members_.push_back(make_mlp(sizes, config_.activation, Activation::kLinear, rng));
    optims_.push_back(make_optim_state(members_.back(), adam));
  }
}

void EnsembleModel::set_normalizer(Normalizer n) {
  if (n.mean.size() != state_dim_ + action_dim_ || n.std.size() != n.mean.size()) {
    throw DimensionError("normalizer size mismatch");
  }
  if ((n.std.array() <= 0).any()) throw ParameterError("normalizer std must be positive");
  normalizer_ = std::move(n);
}

void EnsembleModel::set_validation_losses(std::vector<double> losses) {
  if (static_cast<int>(losses.size()) != size()) {
    throw DimensionError("one validation loss per member expected");
  }
  validation_losses_ = std::move(losses);
  elites_ = select_members(validation_losses_);
}

Matrix EnsembleModel::predict_batch(int k, const Matrix& states, const Matrix& actions) const {
  if (k < 0 || k >= size()) throw ParameterError("ensemble member index out of range");
  if (states.rows() != state_dim_ || actions.rows() != action_dim_ ||
      states.cols() != actions.cols()) {
    throw DimensionError("predict: state/action shape mismatch");
  }
  const Matrix out =
      mlp_forward_batch(members_[k], normalizer_.apply(stack_inputs(states, actions)));
  return out.topRows(state_dim_ + 1);
}

ModelPrediction EnsembleModel::predict(int k, const Vector& x, const Vector& u) const {
  const Matrix out = predict_batch(k, x, u);
  if (!out.allFinite()) throw NumericError("ensemble member produced a non-finite prediction");
  ModelPrediction p;
  p.delta = out.col(0).head(state_dim_);
  p.reward = out(state_dim_, 0);
  p.next_state = x + p.delta;
  return p;
}

std::vector<int> select_members(const std::vector<double>& validation_losses) {
  std::vector<int> order(validation_losses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return validation_losses[a] < validation_losses[b];
  });
  const std::size_t keep = (validation_losses.size() + 1) / 2;
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<int> select_members(const EnsembleModel& model) {
  return select_members(model.validation_losses());
}

double evaluate_mse(const EnsembleModel& model, int k, const buffers::TransitionBatch& data) {
  const Matrix pred = model.predict_batch(k, data.states, data.actions);
  const Matrix target = stack_targets(data);
  return (pred - target).squaredNorm() / static_cast<double>(target.size());
}

TrainReport train_ensemble(EnsembleModel& model, const buffers::TransitionBatch& data,
                           Rng& rng) {
  TrainReport report;
  const auto n = static_cast<std::size_t>(data.size());
  const EnsembleConfig& cfg = model.config_;
  if (n < cfg.min_transitions || n < 2) return report;
  if (data.states.rows() != model.state_dim_ || data.actions.rows() != model.action_dim_) {
    throw DimensionError("train_ensemble: data shape mismatch");
  }
  if (!cfg.warm_start) model.init_members(rng);

  const Matrix raw_inputs = stack_inputs(data.states, data.actions);
  const Matrix targets = stack_targets(data);
  model.normalizer_ = Normalizer::fit(raw_inputs, cfg.std_floor);
  const Matrix inputs = model.normalizer_.apply(raw_inputs);

  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(cfg.validation_fraction * static_cast<double>(n))), 1,
      n - 1);
  const std::size_t n_train = n - n_val;

  std::vector<double> losses(model.members_.size());
  double train_loss_sum = 0.0;
  Matrix grad;
  for (std::size_t k = 0; k < model.members_.size(); ++k) {
    Rng mrng(rng.next_u64());
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), mrng);
    // perm[0, n_val) is held out; the rest is the pool the bootstrap draws from.
    std::vector<Eigen::Index> boot(n_train);
    for (auto& b : boot) b = perm[n_val + mrng.index(n_train)];

    MlpParams& net = model.members_[k];
    OptimState& opt = model.optims_[k];
    int updates = 0;
    double last_epoch_loss = 0.0;
    bool capped = false;
    for (int epoch = 0; epoch < cfg.epochs && !capped; ++epoch) {
      std::shuffle(boot.begin(), boot.end(), mrng);
      double epoch_loss = 0.0;
      int batches = 0;
      for (std::size_t begin = 0; begin < n_train; begin += cfg.batch_size) {
        const std::size_t end = std::min(n_train, begin + cfg.batch_size);
        const Matrix x = gather(inputs, boot, begin, end);
        const Matrix y = gather(targets, boot, begin, end);
        const MlpTape tape = mlp_forward_tape(net, x);
        epoch_loss += loss_and_grad(tape.output(), y, cfg.gaussian_nll, grad);
        ++batches;
        const MlpBackward back = mlp_backward(net, tape, grad);
        opt_step(net, back.param_grads, opt);
        if (++updates == cfg.max_updates) {
          capped = true;
          break;
        }
      }
      last_epoch_loss = epoch_loss / std::max(batches, 1);
    }
    train_loss_sum += last_epoch_loss;
    report.updates = updates;

    const Matrix xv = gather(inputs, perm, 0, n_val);
    const Matrix yv = gather(targets, perm, 0, n_val);
    const Matrix pv = mlp_forward_batch(net, xv).topRows(yv.rows());
    losses[k] = (pv - yv).squaredNorm() / static_cast<double>(yv.size());
    if (!std::isfinite(losses[k])) {
      throw NumericError("ensemble member diverged: non-finite validation loss");
    }
  }
  model.set_validation_losses(losses);
  model.trained_ = true;
  report.status = TrainStatus::kTrained;
  report.validation_losses = std::move(losses);
  report.train_loss = train_loss_sum / static_cast<double>(model.members_.size());
  return report;
}

TrainReport train_ensemble(EnsembleModel& model, const buffers::ReplayBuffer& buffer,
                           Rng& rng) {
  if (buffer.size() < model.config().min_transitions) return {};
  return train_ensemble(model, buffer.all(), rng);
}

void EnsembleModel::save(Archive& ar, const std::string& prefix) const {
  const std::uint64_t meta[] = {static_cast<std::uint64_t>(state_dim_),
                                static_cast<std::uint64_t>(action_dim_), members_.size(),
                                trained_ ? 1u : 0u};
  ar.put_u64(prefix + "meta", meta);
  for (std::size_t k = 0; k < members_.size(); ++k) {
    put_mlp(ar, prefix + "member" + std::to_string(k) + ".", members_[k]);
    put_optim(ar, prefix + "optim" + std::to_string(k) + ".", optims_[k]);
  }
  ar.put(prefix + "norm.mean", Matrix(normalizer_.mean));
  ar.put(prefix + "norm.std", Matrix(normalizer_.std));
  ar.put(prefix + "val_losses", {validation_losses_.size()}, validation_losses_);
}

EnsembleModel EnsembleModel::load(const Archive& ar, const std::string& prefix,
                                  EnsembleConfig config) {
  const auto meta = ar.u64s(prefix + "meta");
  if (meta.size() != 4) throw IntegrityError("ensemble metadata has the wrong length");
  EnsembleModel m;
  m.state_dim_ = static_cast<int>(meta[0]);
  m.action_dim_ = static_cast<int>(meta[1]);
  config.members = static_cast<int>(meta[2]);
  m.config_ = std::move(config);
  m.trained_ = meta[3] != 0;
  for (std::uint64_t k = 0; k < meta[2]; ++k) {
    m.members_.push_back(get_mlp(ar, prefix + "member" + std::to_string(k) + "."));
    m.optims_.push_back(get_optim(ar, prefix + "optim" + std::to_string(k) + "."));
    if (m.members_.back().input_dim() != m.state_dim_ + m.action_dim_) {
      throw IntegrityError("ensemble member input width disagrees with metadata");
    }
  }
  m.normalizer_.mean = ar.vector(prefix + "norm.mean");
  m.normalizer_.std = ar.vector(prefix + "norm.std");
  const auto& vl = ar.get(prefix + "val_losses").f64;
  m.set_validation_losses(std::vector<double>(vl.begin(), vl.end()));
  return m;
}

}  // namespace demorl::model

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

#include "demorl/sac/agent.hpp"

#include <cmath>
#include <numbers>

#include "demorl/errors.hpp"

namespace demorl::sac {
namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// log(1 - tanh(z)²) without cancellation for large |z|.
double log_one_minus_tanh_sq(double z) {
  return 2.0 * (std::numbers::ln2 - z - softplus(-2.0 * z));
}

Matrix critic_input(const Matrix& states, const Matrix& normalized_actions) {
  Matrix in(states.rows() + normalized_actions.rows(), states.cols());
  in.topRows(states.rows()) = states;
  in.bottomRows(normalized_actions.rows()) = normalized_actions;
  return in;
}

Matrix normalize_actions(const SacAgent& agent, const Matrix& actions) {
  return (actions.colwise() - agent.action_center).array().colwise() /
         agent.action_half_range.array();
}

void check_states(const SacAgent& agent, const Matrix& states) {
  if (states.rows() != agent.state_dim) throw DimensionError("SAC: state width mismatch");
}

}  // namespace

void SacConfig::validate() const {
  if (hidden.empty()) throw ParameterError("SAC needs at least one hidden layer");
  for (int h : hidden) {
    if (h < 1) throw ParameterError("SAC hidden widths must be positive");
  }
  if (!(actor_lr > 0 && critic_lr > 0 && temperature_lr > 0)) {
    throw ParameterError("SAC learning rates must be positive");
  }
  if (!(tau >= 0 && tau <= 1)) throw ParameterError("SAC tau must lie in [0, 1]");
  if (!(gamma > 0 && gamma < 1)) throw ParameterError("SAC gamma must lie in (0, 1)");
  if (!(init_temperature > 0)) throw ParameterError("initial temperature must be positive");
  if (batch_size < 1) throw ParameterError("SAC batch size must be positive");
  if (!(log_std_min < log_std_max)) throw ParameterError("log-std bounds are inverted");
}

double SacAgent::temperature() const { return std::exp(log_temperature); }

SacAgent make_agent(const envs::EnvSpec& spec, SacConfig config, Rng& rng) {
  spec.validate();
  config.validate();
  SacAgent a;
  a.config = std::move(config);
  a.state_dim = spec.state_dim;
  a.action_dim = spec.action_dim;
  a.action_center = spec.action_center();
  a.action_half_range = spec.action_half_range();
  a.target_entropy = a.config.target_entropy.value_or(-static_cast<double>(spec.action_dim));

  std::vector<int> actor_sizes{spec.state_dim};
  actor_sizes.insert(actor_sizes.end(), a.config.hidden.begin(), a.config.hidden.end());
  actor_sizes.push_back(2 * spec.action_dim);
  std::vector<int> critic_sizes{spec.state_dim + spec.action_dim};
  critic_sizes.insert(critic_sizes.end(), a.config.hidden.begin(), a.config.hidden.end());
  critic_sizes.push_back(1);

  a.actor = make_mlp(actor_sizes, a.config.activation, Activation::kLinear, rng);
  a.critic1 = make_mlp(critic_sizes, a.config.activation, Activation::kLinear, rng);
  a.critic2 = make_mlp(critic_sizes, a.config.activation, Activation::kLinear, rng);
  a.target1 = a.critic1;
  a.target2 = a.critic2;
  a.log_temperature = std::log(a.config.init_temperature);

  a.actor_opt = make_optim_state(a.actor, {.learning_rate = a.config.actor_lr});
  a.critic1_opt = make_optim_state(a.critic1, {.learning_rate = a.config.critic_lr});
  a.critic2_opt = make_optim_state(a.critic2, {.learning_rate = a.config.critic_lr});
  a.temperature_opt = make_scalar_optim_state({.learning_rate = a.config.temperature_lr});
  return a;
}

SquashedBatch squash_sample(const Matrix& mean, const Matrix& log_std, const Matrix& eps,
                            const Vector& center, const Vector& half_range) {
  if (mean.rows() != center.size() || log_std.rows() != mean.rows() ||
      eps.rows() != mean.rows() || log_std.cols() != mean.cols() ||
      eps.cols() != mean.cols() || half_range.size() != center.size()) {
    throw DimensionError("squash_sample: shape mismatch");
  }
  SquashedBatch s;
  s.pre_squash = mean.array() + log_std.array().exp() * eps.array();
  s.normalized = s.pre_squash.array().tanh();
  s.actions = (s.normalized.array().colwise() * half_range.array()).colwise() +
              center.array();
  const double log_h = half_range.array().log().sum();
  s.log_prob.resize(mean.cols());
  for (Eigen::Index c = 0; c < mean.cols(); ++c) {
    double lp = -log_h;
    for (Eigen::Index j = 0; j < mean.rows(); ++j) {
      lp += -0.5 * eps(j, c) * eps(j, c) - log_std(j, c) - kHalfLog2Pi -
            log_one_minus_tanh_sq(s.pre_squash(j, c));
    }
    s.log_prob[c] = lp;
  }
  return s;
}

double squashed_log_prob(const Vector& z, const Vector& mean, const Vector& log_std,
                         const Vector& half_range) {
  double lp = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double e = (z[j] - mean[j]) * std::exp(-log_std[j]);
    lp += -0.5 * e * e - log_std[j] - kHalfLog2Pi - log_one_minus_tanh_sq(z[j]) -
          std::log(half_range[j]);
  }
  return lp;
}

void actor_head(const SacAgent& agent, const Matrix& raw, Matrix& mean, Matrix& log_std) {
  const int m = agent.action_dim;
  mean = raw.topRows(m);
  log_std = raw.bottomRows(m).cwiseMax(agent.config.log_std_min).cwiseMin(
      agent.config.log_std_max);
}

Matrix actor_mean_batch(const SacAgent& agent, const Matrix& states) {
  check_states(agent, states);
  const Matrix raw = mlp_forward_batch(agent.actor, states);
  const Matrix t = raw.topRows(agent.action_dim).array().tanh();
  return (t.array().colwise() * agent.action_half_range.array()).colwise() +
         agent.action_center.array();
}

SquashedBatch actor_sample_batch(const SacAgent& agent, const Matrix& states, Rng& rng) {
  check_states(agent, states);
  Matrix mean, log_std;
  actor_head(agent, mlp_forward_batch(agent.actor, states), mean, log_std);
  const Matrix eps = standard_normal(rng, agent.action_dim, states.cols());
  return squash_sample(mean, log_std, eps, agent.action_center, agent.action_half_range);
}

ActionSample actor_sample(const SacAgent& agent, const Vector& x, Rng& rng,
                          bool deterministic) {
  if (!x.allFinite()) throw NumericError("actor_sample: non-finite state");
  check_states(agent, x);
  Matrix mean, log_std;
  actor_head(agent, mlp_forward_batch(agent.actor, x), mean, log_std);
  const Matrix eps = deterministic ? Matrix::Zero(agent.action_dim, 1)
                                   : standard_normal(rng, agent.action_dim, 1);
  const SquashedBatch s =
      squash_sample(mean, log_std, eps, agent.action_center, agent.action_half_range);
  // tanh saturates to exactly ±1 in floating point far out in the tail.
  Vector action = s.actions.col(0);
  action = action.cwiseMax(agent.action_center - agent.action_half_range)
               .cwiseMin(agent.action_center + agent.action_half_range);
  return {action, s.log_prob[0], mean.col(0)};
}

Vector min_q(const SacAgent& agent, const Matrix& states, const Matrix& actions) {
  check_states(agent, states);
  const Matrix in = critic_input(states, normalize_actions(agent, actions));
  const Matrix q1 = mlp_forward_batch(agent.critic1, in);
  const Matrix q2 = mlp_forward_batch(agent.critic2, in);
  return q1.cwiseMin(q2).row(0).transpose();
}

Vector value_estimate_batch(const SacAgent& agent, const Matrix& states, const Matrix& eps) {
  check_states(agent, states);
  Matrix mean, log_std;
  actor_head(agent, mlp_forward_batch(agent.actor, states), mean, log_std);
  const SquashedBatch s =
      squash_sample(mean, log_std, eps, agent.action_center, agent.action_half_range);
  const Matrix in = critic_input(states, s.normalized);
  const Matrix q1 = mlp_forward_batch(agent.critic1, in);
  const Matrix q2 = mlp_forward_batch(agent.critic2, in);
  return q1.cwiseMin(q2).row(0).transpose() - agent.temperature() * s.log_prob;
}

Vector value_estimate_batch(const SacAgent& agent, const Matrix& states, Rng& rng) {
  return value_estimate_batch(agent, states,
                              standard_normal(rng, agent.action_dim, states.cols()));
}

double value_estimate(const SacAgent& agent, const Vector& x, Rng& rng) {
  return value_estimate_batch(agent, x, rng)[0];
}

CriticGrads critic_loss(const SacAgent& agent, const buffers::TransitionBatch& batch,
                        const Matrix& next_eps) {
  check_states(agent, batch.states);
  const Eigen::Index b = batch.size();
  const double alpha = agent.temperature();
  const double gamma = agent.config.gamma;

  Matrix mean, log_std;
  actor_head(agent, mlp_forward_batch(agent.actor, batch.next_states), mean, log_std);
  const SquashedBatch next =
      squash_sample(mean, log_std, next_eps, agent.action_center, agent.action_half_range);
  const Matrix next_in = critic_input(batch.next_states, next.normalized);
  const Vector next_q = mlp_forward_batch(agent.target1, next_in)
                            .cwiseMin(mlp_forward_batch(agent.target2, next_in))
                            .row(0)
                            .transpose();
  const Vector target =
      batch.rewards.array() +
      gamma * (1.0 - batch.dones.array()) * (next_q - alpha * next.log_prob).array();

  const Matrix in = critic_input(batch.states, normalize_actions(agent, batch.actions));
  const MlpTape t1 = mlp_forward_tape(agent.critic1, in);
  const MlpTape t2 = mlp_forward_tape(agent.critic2, in);
  const Matrix e1 = t1.output() - target.transpose();
  const Matrix e2 = t2.output() - target.transpose();
  const double inv_b = 1.0 / static_cast<double>(b);

  CriticGrads g;
  g.loss = 0.5 * inv_b * (e1.squaredNorm() + e2.squaredNorm());
  g.critic1 = mlp_backward(agent.critic1, t1, inv_b * e1).param_grads;
  g.critic2 = mlp_backward(agent.critic2, t2, inv_b * e2).param_grads;
  return g;
}

ActorGrads actor_loss(const SacAgent& agent, const Matrix& states, const Matrix& eps) {
  check_states(agent, states);
  const int m = agent.action_dim;
  const Eigen::Index b = states.cols();
  const double alpha = agent.temperature();
  const double inv_b = 1.0 / static_cast<double>(b);

  const MlpTape ta = mlp_forward_tape(agent.actor, states);
  Matrix mean, log_std;
  actor_head(agent, ta.output(), mean, log_std);
  const SquashedBatch s =
      squash_sample(mean, log_std, eps, agent.action_center, agent.action_half_range);

  const Matrix in = critic_input(states, s.normalized);
  const MlpTape t1 = mlp_forward_tape(agent.critic1, in);
  const MlpTape t2 = mlp_forward_tape(agent.critic2, in);
  Matrix pick1 = Matrix::Zero(1, b);
  Matrix pick2 = Matrix::Zero(1, b);
  double min_q_sum = 0.0;
  for (Eigen::Index c = 0; c < b; ++c) {
    const double q1 = t1.output()(0, c);
    const double q2 = t2.output()(0, c);
    if (q1 <= q2) {
      pick1(0, c) = 1.0;
      min_q_sum += q1;
    } else {
      pick2(0, c) = 1.0;
      min_q_sum += q2;
    }
  }
  // dQ/d(normalized action), through whichever critic is the minimum.
  const Matrix dq = mlp_input_grad(agent.critic1, t1, pick1).bottomRows(m) +
                    mlp_input_grad(agent.critic2, t2, pick2).bottomRows(m);

  Matrix out_grad(2 * m, b);
  const Matrix& raw = ta.output();
  for (Eigen::Index c = 0; c < b; ++c) {
    for (int j = 0; j < m; ++j) {
      const double t = s.normalized(j, c);
      const double dt_dz = 1.0 - t * t;
      const double dz_dls = std::exp(log_std(j, c)) * eps(j, c);
      out_grad(j, c) = inv_b * (alpha * 2.0 * t - dq(j, c) * dt_dz);
      const double raw_ls = raw(m + j, c);
      const bool clamped =
          raw_ls < agent.config.log_std_min || raw_ls > agent.config.log_std_max;
      out_grad(m + j, c) =
          clamped ? 0.0
                  : inv_b * (alpha * (-1.0 + 2.0 * t * dz_dls) - dq(j, c) * dt_dz * dz_dls);
    }
  }

  ActorGrads g;
  g.mean_log_prob = s.log_prob.mean();
  g.loss = alpha * g.mean_log_prob - inv_b * min_q_sum;
  g.actor = mlp_backward(agent.actor, ta, out_grad).param_grads;
  return g;
}

TemperatureGrad temperature_loss(const SacAgent& agent, double mean_log_prob) {
  const double drive = mean_log_prob + agent.target_entropy;
  return {-agent.log_temperature * drive, -drive};
}

SacLosses sac_update(SacAgent& agent, const buffers::TransitionBatch& batch, Rng& rng) {
  if (batch.size() < 1) throw ParameterError("sac_update: empty batch");
  const Matrix next_eps = standard_normal(rng, agent.action_dim, batch.size());
  const Matrix eps = standard_normal(rng, agent.action_dim, batch.size());
  const CriticGrads cg = critic_loss(agent, batch, next_eps);
  const ActorGrads ag = actor_loss(agent, batch.states, eps);
  const TemperatureGrad tg = temperature_loss(agent, ag.mean_log_prob);
  if (!std::isfinite(cg.loss) || !std::isfinite(ag.loss) || !std::isfinite(tg.loss) ||
      !std::isfinite(tg.grad) || !cg.critic1.all_finite() || !cg.critic2.all_finite() ||
      !ag.actor.all_finite()) {
    throw NumericError("sac_update: non-finite loss or gradient");
  }
  opt_step(agent.critic1, cg.critic1, agent.critic1_opt);
  opt_step(agent.critic2, cg.critic2, agent.critic2_opt);
  opt_step(agent.actor, ag.actor, agent.actor_opt);
  if (agent.config.learn_temperature) {
    opt_step(agent.log_temperature, tg.grad, agent.temperature_opt);
  }
  soft_update(agent.target1, agent.critic1, agent.config.tau);
  soft_update(agent.target2, agent.critic2, agent.config.tau);
  return {cg.loss, ag.loss, tg.loss};
}

void SacAgent::save(Archive& ar, const std::string& prefix) const {
  const std::uint64_t dims[] = {static_cast<std::uint64_t>(state_dim),
                                static_cast<std::uint64_t>(action_dim)};
  ar.put_u64(prefix + "dims", dims);
  ar.put(prefix + "action_center", Matrix(action_center));
  ar.put(prefix + "action_half_range", Matrix(action_half_range));
  ar.put(prefix + "target_entropy", target_entropy);
  ar.put(prefix + "log_temperature", log_temperature);
  put_mlp(ar, prefix + "actor.", actor);
  put_mlp(ar, prefix + "critic1.", critic1);
  put_mlp(ar, prefix + "critic2.", critic2);
  put_mlp(ar, prefix + "target1.", target1);
  put_mlp(ar, prefix + "target2.", target2);
  put_optim(ar, prefix + "actor_opt.", actor_opt);
  put_optim(ar, prefix + "critic1_opt.", critic1_opt);
  put_optim(ar, prefix + "critic2_opt.", critic2_opt);
  put_optim(ar, prefix + "temperature_opt.", temperature_opt);
}

SacAgent SacAgent::load(const Archive& ar, const std::string& prefix, SacConfig config) {
  SacAgent a;
  a.config = std::move(config);
  const auto dims = ar.u64s(prefix + "dims");
  if (dims.size() != 2) throw IntegrityError("agent dims entry has the wrong length");
  a.state_dim = static_cast<int>(dims[0]);
  a.action_dim = static_cast<int>(dims[1]);
  a.action_center = ar.vector(prefix + "action_center");
  a.action_half_range = ar.vector(prefix + "action_half_range");
  a.target_entropy = ar.scalar(prefix + "target_entropy");
  a.log_temperature = ar.scalar(prefix + "log_temperature");
  a.actor = get_mlp(ar, prefix + "actor.");
  a.critic1 = get_mlp(ar, prefix + "critic1.");
  a.critic2 = get_mlp(ar, prefix + "critic2.");
  a.target1 = get_mlp(ar, prefix + "target1.");
  a.target2 = get_mlp(ar, prefix + "target2.");
  a.actor_opt = get_optim(ar, prefix + "actor_opt.");
  a.critic1_opt = get_optim(ar, prefix + "critic1_opt.");
  a.critic2_opt = get_optim(ar, prefix + "critic2_opt.");
  a.temperature_opt = get_optim(ar, prefix + "temperature_opt.");
  if (a.actor.input_dim() != a.state_dim || a.actor.output_dim() != 2 * a.action_dim ||
      a.critic1.input_dim() != a.state_dim + a.action_dim ||
      a.action_center.size() != a.action_dim) {
    throw IntegrityError("agent networks disagree with the stored dimensions");
  }
  return a;
}

}  // namespace demorl::sac

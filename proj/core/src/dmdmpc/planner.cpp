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

#include "demorl/dmdmpc/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "demorl/errors.hpp"

namespace demorl::dmdmpc {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix clip_rows(Matrix means, const envs::EnvSpec& spec) {
  for (Eigen::Index h = 0; h < means.rows(); ++h) {
    means.row(h) = means.row(h)
                       .cwiseMax(spec.action_low.transpose())
                       .cwiseMin(spec.action_high.transpose());
  }
  return means;
}

void check_sequences(const std::vector<Matrix>& sequences, const Vector& costs) {
  if (sequences.empty()) throw ParameterError("aggregation needs at least one elite");
  if (static_cast<Eigen::Index>(sequences.size()) != costs.size()) {
    throw DimensionError("one cost per sequence expected");
  }
  for (const Matrix& s : sequences) {
    if (s.rows() != sequences.front().rows() || s.cols() != sequences.front().cols()) {
      throw DimensionError("elite sequences have different shapes");
    }
  }
}

}  // namespace

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::kExpUtility: return "exp-utility";
    case Aggregation::kCostProportional: return "cost-proportional";
    case Aggregation::kUniform: return "uniform";
  }
  return "exp-utility";
}

Aggregation aggregation_from_string(std::string_view name) {
  if (name == "exp-utility") return Aggregation::kExpUtility;
  if (name == "cost-proportional") return Aggregation::kCostProportional;
  if (name == "uniform") return Aggregation::kUniform;
  throw ParameterError("unknown aggregation mode '" + std::string(name) + "'");
}

void PlannerConfig::validate() const {
  if (horizon < 1) throw ParameterError("planner horizon must be at least 1");
  if (rollouts < 1) throw ParameterError("planner needs at least one rollout");
  if (!(elite_fraction > 0 && elite_fraction <= 1)) {
    throw ParameterError("elite fraction must lie in (0, 1]");
  }
  if (!(alpha >= 0 && alpha <= 1)) throw ParameterError("step size must lie in [0, 1]");
  if (!(std_scale > 0)) throw ParameterError("sampling std must be positive");
  if (temperature && !(*temperature > 0)) throw ParameterError("temperature must be positive");
  if (inner_iters < 1) throw ParameterError("inner_iters must be at least 1");
  if (!(gamma > 0 && gamma <= 1)) throw ParameterError("planner gamma must lie in (0, 1]");
}

ShiftResult shift_plan(const PolicyFn& policy, const DynamicsModel& model, int member,
                       const Vector& x0, int horizon) {
  if (horizon < 1) throw ParameterError("shift_plan: horizon must be at least 1");
  if (!x0.allFinite()) throw NumericError("shift_plan: non-finite start state");
  const int n = model.state_dim();
  const int m = model.action_dim();
  ShiftResult r;
  r.means.resize(horizon, m);
  r.states.setConstant(horizon + 1, n, kNaN);
  r.states.row(0) = x0.transpose();
  Matrix x = x0;
  Matrix next;
  Vector reward;
  for (int h = 0; h < horizon; ++h) {
    const Matrix u = policy(x);
    if (u.rows() != m || u.cols() != 1) throw DimensionError("policy output shape mismatch");
    r.means.row(h) = u.col(0).transpose();
    if (h + 1 == horizon) break;
    model.step(member, x, u, next, reward);
    if (!next.allFinite()) {
      r.truncated = true;
      for (int k = h + 1; k < horizon; ++k) r.means.row(k) = r.means.row(h);
      break;
    }
    x = next;
    r.states.row(h + 1) = x.col(0).transpose();
  }
  if (!r.truncated) {
    const Matrix u_last = r.means.row(horizon - 1).transpose();
    model.step(member, x, u_last, next, reward);
    if (next.allFinite()) r.states.row(horizon) = next.col(0).transpose();
  }
  return r;
}

Matrix RolloutBatch::sequence(int i) const {
  const Eigen::Index m = actions.front().rows();
  Matrix s(horizon, m);
  for (int h = 0; h < horizon; ++h) s.row(h) = actions[h].col(i).transpose();
  return s;
}

double trajectory_cost(const Vector& rewards, double terminal_value, double gamma) {
  double cost = 0.0;
  double discount = 1.0;
  for (Eigen::Index h = 0; h < rewards.size(); ++h) {
    cost -= discount * rewards[h];
    discount *= gamma;
  }
  return cost - discount * terminal_value;
}

RolloutBatch rollout_batch(const Matrix& means, const Vector& std, const DynamicsModel& model,
                           const std::vector<int>& members, const Vector& x0, int count,
                           double gamma, const ValueFn& value, const envs::EnvSpec& spec,
                           Rng& rng) {
  if (count < 1) throw ParameterError("rollout_batch: M must be at least 1");
  if (members.empty()) throw ParameterError("rollout_batch: no model members to plan on");
  const auto horizon = static_cast<int>(means.rows());
  const int m = model.action_dim();
  if (means.cols() != m || std.size() != m) throw DimensionError("rollout_batch: bad plan shape");
  if ((std.array() <= 0).any()) throw ParameterError("rollout_batch: std must be positive");

  RolloutBatch b;
  b.horizon = horizon;
  b.count = count;
  b.members.resize(count);
  for (int& k : b.members) k = members[rng.index(members.size())];
  b.states.assign(horizon + 1, Matrix());
  b.states[0] = x0.replicate(1, count);
  b.actions.resize(horizon);
  for (int h = 0; h < horizon; ++h) {
    Matrix u = standard_normal(rng, m, count);
    u = (u.array().colwise() * std.array()).matrix();
    u.colwise() += means.row(h).transpose();
    for (Eigen::Index j = 0; j < m; ++j) {
      u.row(j) = u.row(j).cwiseMax(spec.action_low[j]).cwiseMin(spec.action_high[j]);
    }
    b.actions[h] = std::move(u);
  }

  // Trajectories sharing a member are stepped together.
  std::vector<int> distinct = b.members;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  b.rewards.resize(horizon, count);
  for (int h = 0; h < horizon; ++h) b.states[h + 1].resize(model.state_dim(), count);
  Matrix xs, us, next;
  Vector r;
  for (int k : distinct) {
    std::vector<Eigen::Index> cols;
    for (int i = 0; i < count; ++i) {
      if (b.members[i] == k) cols.push_back(i);
    }
    const auto nk = static_cast<Eigen::Index>(cols.size());
    xs.resize(model.state_dim(), nk);
    us.resize(m, nk);
    for (Eigen::Index c = 0; c < nk; ++c) xs.col(c) = x0;
    for (int h = 0; h < horizon; ++h) {
      for (Eigen::Index c = 0; c < nk; ++c) us.col(c) = b.actions[h].col(cols[c]);
      model.step(k, xs, us, next, r);
      for (Eigen::Index c = 0; c < nk; ++c) {
        b.states[h + 1].col(cols[c]) = next.col(c);
        b.rewards(h, cols[c]) = r[c];
      }
      xs = next;
    }
  }

  b.valid.assign(count, true);
  for (int i = 0; i < count; ++i) {
    bool ok = b.rewards.col(i).allFinite();
    for (int h = 1; ok && h <= horizon; ++h) ok = b.states[h].col(i).allFinite();
    b.valid[i] = ok;
    if (!ok) ++b.dropped;
  }
  if (2 * b.dropped > count) {
    throw PlannerDegeneracyError("more than half of the planner rollouts diverged (" +
                                 std::to_string(b.dropped) + "/" + std::to_string(count) +
                                 ")");
  }

  b.terminal_values = Vector::Zero(count);
  if (value) {
    std::vector<Eigen::Index> live;
    for (int i = 0; i < count; ++i) {
      if (b.valid[i]) live.push_back(i);
    }
    Matrix xh(model.state_dim(), static_cast<Eigen::Index>(live.size()));
    for (std::size_t c = 0; c < live.size(); ++c) {
      xh.col(static_cast<Eigen::Index>(c)) = b.states[horizon].col(live[c]);
    }
    const Vector v = value(xh, rng);
    for (std::size_t c = 0; c < live.size(); ++c) {
      b.terminal_values[live[c]] = v[static_cast<Eigen::Index>(c)];
    }
  }

  b.costs.resize(count);
  for (int i = 0; i < count; ++i) {
    double c = b.valid[i] ? trajectory_cost(b.rewards.col(i), b.terminal_values[i], gamma) : kNaN;
    if (!std::isfinite(c)) {
      if (b.valid[i]) {
        b.valid[i] = false;
        ++b.dropped;
      }
      c = kNaN;
    }
    b.costs[i] = c;
  }
  if (2 * b.dropped > count) {
    throw PlannerDegeneracyError("more than half of the planner rollouts have non-finite cost");
  }
  return b;
}

int elite_count(int samples, double fraction) {
  if (!(fraction > 0 && fraction <= 1)) throw ParameterError("elite fraction must lie in (0, 1]");
  // The slack keeps products such as 0.1 * 10 from landing just below 1.
  const int k = static_cast<int>(std::floor(fraction * samples + 1e-9));
  return std::clamp(k, 1, std::max(samples, 1));
}

EliteSet select_elites(const Vector& costs, double fraction) {
  const auto total = static_cast<int>(costs.size());
  const int want = elite_count(total, fraction);
  std::vector<int> finite;
  for (int i = 0; i < total; ++i) {
    if (std::isfinite(costs[i])) finite.push_back(i);
  }
  if (finite.empty()) throw PlannerDegeneracyError("no finite rollout cost to select from");
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(want), finite.size());
  const auto by_cost = [&](int a, int b) {
    return costs[a] < costs[b] || (costs[a] == costs[b] && a < b);
  };
  std::partial_sort(finite.begin(), finite.begin() + static_cast<std::ptrdiff_t>(keep),
                    finite.end(), by_cost);
  finite.resize(keep);
  return {finite, costs[finite.back()]};
}

Vector aggregation_weights(const Vector& costs, Aggregation mode,
                           std::optional<double> temperature) {
  const Eigen::Index k = costs.size();
  if (k == 0) throw ParameterError("aggregation needs at least one elite");
  Vector w;
  switch (mode) {
    case Aggregation::kExpUtility: {
      const double c_min = costs.minCoeff();
      const double lambda = temperature.value_or(costs.maxCoeff() - c_min + 1e-8);
      w = (-(costs.array() - c_min) / lambda).exp();
      break;
    }
    case Aggregation::kCostProportional: {
      const double total = costs.sum();
      if (total == 0.0) {
        spdlog::warn("cost-proportional aggregation: elite costs sum to zero, using uniform weights");
        return Vector::Constant(k, 1.0 / static_cast<double>(k));
      }
      return costs / total;
    }
    case Aggregation::kUniform:
      return Vector::Constant(k, 1.0 / static_cast<double>(k));
  }
  return w / w.sum();
}

Matrix aggregate_elites(const std::vector<Matrix>& sequences, const Vector& costs,
                        Aggregation mode, std::optional<double> temperature) {
  check_sequences(sequences, costs);
  const Vector w = aggregation_weights(costs, mode, temperature);
  Matrix g = Matrix::Zero(sequences.front().rows(), sequences.front().cols());
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    g += w[static_cast<Eigen::Index>(i)] * sequences[i];
  }
  return g;
}

Matrix aggregate_elites(const RolloutBatch& batch, const std::vector<int>& elites,
                        Aggregation mode, std::optional<double> temperature) {
  std::vector<Matrix> seqs;
  Vector costs(static_cast<Eigen::Index>(elites.size()));
  for (std::size_t i = 0; i < elites.size(); ++i) {
    seqs.push_back(batch.sequence(elites[i]));
    costs[static_cast<Eigen::Index>(i)] = batch.costs[elites[i]];
  }
  return aggregate_elites(seqs, costs, mode, temperature);
}

Matrix dmd_mix(const Matrix& shifted, const Matrix& aggregate, double alpha) {
  if (shifted.rows() != aggregate.rows() || shifted.cols() != aggregate.cols()) {
    throw DimensionError("dmd_update: plan shapes differ");
  }
  if (!(alpha >= 0 && alpha <= 1)) throw ParameterError("dmd_update: alpha must lie in [0, 1]");
  return (1.0 - alpha) * shifted + alpha * aggregate;
}

Matrix dmd_update(const Matrix& shifted, const Matrix& aggregate, double alpha,
                  const envs::EnvSpec& spec) {
  return clip_rows(dmd_mix(shifted, aggregate, alpha), spec);
}

Matrix objective_gradient(const Matrix& shifted, const std::vector<Matrix>& sequences,
                          const Vector& costs) {
  check_sequences(sequences, costs);
  Matrix grad = Matrix::Zero(shifted.rows(), shifted.cols());
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    grad += costs[static_cast<Eigen::Index>(i)] * (sequences[i] - shifted);
  }
  return grad / static_cast<double>(sequences.size());
}

Matrix objective_gradient(const Matrix& shifted, const RolloutBatch& batch) {
  std::vector<Matrix> seqs;
  std::vector<double> costs;
  for (int i = 0; i < batch.count; ++i) {
    if (!batch.valid[i]) continue;
    seqs.push_back(batch.sequence(i));
    costs.push_back(batch.costs[i]);
  }
  return objective_gradient(shifted, seqs,
                            Eigen::Map<const Vector>(costs.data(),
                                                     static_cast<Eigen::Index>(costs.size())));
}

double sequence_cost(const DynamicsModel& model, int member, const Vector& x0,
                     const Matrix& means, double gamma, const ValueFn& value, Rng& rng) {
  Matrix x = x0;
  Matrix next;
  Vector r;
  Vector rewards(means.rows());
  for (Eigen::Index h = 0; h < means.rows(); ++h) {
    model.step(member, x, means.row(h).transpose(), next, r);
    rewards[h] = r[0];
    x = next;
  }
  const double v = value ? value(x, rng)[0] : 0.0;
  return trajectory_cost(rewards, v, gamma);
}

PlanResult plan(const Vector& x0, const PolicyFn& policy, const ValueFn& value,
                const DynamicsModel& model, const PlannerConfig& config,
                const envs::EnvSpec& spec, Rng& rng) {
  config.validate();
  const std::vector<int> members = model.planning_members();
  if (members.empty()) throw ParameterError("plan: model has no planning members");

  PlanResult out;
  const int shift_member = members[rng.index(members.size())];
  ShiftResult shift = shift_plan(policy, model, shift_member, x0, config.horizon);
  out.shifted = shift.means;
  out.shift_truncated = shift.truncated;
  out.plan.std = config.std_scale * spec.action_half_range();
  out.plan.alpha = config.alpha;

  Matrix shifted = clip_rows(shift.means, spec);
  Matrix mu = shifted;
  for (int it = 0; it < config.inner_iters; ++it) {
    const RolloutBatch batch = rollout_batch(shifted, out.plan.std, model, members, x0,
                                             config.rollouts, config.gamma, value, spec, rng);
    const EliteSet elites = select_elites(batch.costs, config.elite_fraction);
    const Matrix g = aggregate_elites(batch, elites.indices, config.aggregation,
                                      config.temperature);
    if (config.aggregation == Aggregation::kCostProportional) {
      double total = 0.0;
      for (int i : elites.indices) total += batch.costs[i];
      out.zero_sum_fallback = out.zero_sum_fallback || total == 0.0;
    }
    mu = dmd_update(shifted, g, config.alpha, spec);
    out.dropped += batch.dropped;
    double sum = 0.0;
    for (int i : elites.indices) sum += batch.costs[i];
    out.mean_elite_cost = sum / static_cast<double>(elites.indices.size());
    out.elite_threshold = elites.threshold;
    shifted = mu;
  }
  out.plan.means = mu;

  const int sim_member = members[rng.index(members.size())];
  Matrix x = x0;
  Matrix next;
  Vector r;
  for (int h = 0; h < config.horizon; ++h) {
    const Vector u = mu.row(h).transpose();
    model.step(sim_member, x, u, next, r);
    if (!next.allFinite() || !std::isfinite(r[0])) break;
    out.transitions.push_back({x.col(0), u, r[0], next.col(0), false});
    x = next;
  }
  return out;
}

}  // namespace demorl::dmdmpc

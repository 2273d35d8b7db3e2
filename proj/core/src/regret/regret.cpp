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

#include "demorl/regret/regret.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "demorl/errors.hpp"

namespace demorl::regret {
namespace {

using dmdmpc::EnvironmentDynamics;

dmdmpc::ValueFn quadratic_value(const Matrix& P) {
  return [P](const Matrix& states, Rng&) -> Vector {
    return -(states.array() * (P * states).array()).colwise().sum().transpose();
  };
}

Matrix clip_rows(Matrix means, const envs::EnvSpec& spec) {
  for (Eigen::Index h = 0; h < means.rows(); ++h) {
    means.row(h) = means.row(h)
                       .cwiseMax(spec.action_low.transpose())
                       .cwiseMin(spec.action_high.transpose());
  }
  return means;
}

double one_step_error(const RegretInstance& inst, const Vector& x, const Vector& u) {
  const Vector a = inst.model_env.step(x, u).next_state;
  const Vector b = inst.true_env.step(x, u).next_state;
  return (a - b).norm();
}

}  // namespace

double horizon_gap_bound(double cost_bound, double value_bound, double gamma, int horizon, double step_error) {
  if (!(gamma > 0 && gamma < 1)) throw ParameterError("horizon_gap_bound: gamma must lie in (0, 1)");
  if (horizon < 1) throw ParameterError("horizon_gap_bound: horizon must be at least 1");
  if (!(step_error >= 0)) throw ParameterError("horizon_gap_bound: step_error must be non-negative");
  const double H = horizon;
  const double gH = std::pow(gamma, H);
  const double first = 2.0 * cost_bound * ((H - 1.0) * gH * gamma - H * gH + gamma) /
                       ((1.0 - gamma) * (1.0 - gamma)) * step_error;
  const double second = gH * 2.0 * value_bound * H * step_error;
  return first + second;
}

std::string_view to_string(StepSchedule s) {
  return s == StepSchedule::kConstant ? "constant" : "inverse-sqrt";
}

StepSchedule step_schedule_from_string(std::string_view name) {
  if (name == "constant") return StepSchedule::kConstant;
  if (name == "inverse-sqrt") return StepSchedule::kInverseSqrt;
  throw ParameterError("unknown step schedule '" + std::string(name) + "'");
}

void RegretConfig::validate() const {
  if (steps < 1) throw ParameterError("regret: steps must be at least 1");
  if (horizon < 1) throw ParameterError("regret: horizon must be at least 1");
  if (rollouts < 1) throw ParameterError("regret: rollouts must be at least 1");
  if (!(elite_fraction > 0 && elite_fraction <= 1)) {
    throw ParameterError("regret: elite fraction must lie in (0, 1]");
  }
  if (!(alpha >= 0 && alpha <= 1)) throw ParameterError("regret: alpha must lie in [0, 1]");
  if (!(std_scale > 0)) throw ParameterError("regret: std_scale must be positive");
  if (!(model_error >= 0)) throw ParameterError("regret: model_error must be non-negative");
  if (gap_rollouts < 0 || !(gap_state_box > 0)) {
    throw ParameterError("regret: bad model-gap sampling settings");
  }
  if (slope_min_exponent < 0 || slope_max_exponent <= slope_min_exponent) {
    throw ParameterError("regret: slope exponents must satisfy 0 <= lo < hi");
  }
}

RegretInstance make_instance(const envs::LqParams& params, double model_error, Rng& rng) {
  const auto n = params.A.rows();
  const auto m = params.B.cols();
  Matrix delta = standard_normal(rng, n, n + m);
  const double norm = delta.norm();
  delta = model_error > 0 && norm > 0 ? Matrix(delta * (model_error / norm))
                                      : Matrix(Matrix::Zero(n, n + m));
  envs::LqParams model = params;
  model.A += delta.leftCols(n);
  model.B += delta.rightCols(m);

  RiccatiFixedPoint ric = discounted_riccati(params.A, params.B, params.Q, params.R, params.gamma);
  RegretInstance inst{envs::LinearQuadratic(params), envs::LinearQuadratic(model),
                      LqProblem{params.A, params.B, params.Q, params.R, params.gamma, ric.P},
                      ric, 0.0, 0.0};
  inst.cost_bound = inst.true_env.reward_bound();
  inst.value_bound = envs::max_quadratic_on_box(ric.P, params.state_box);
  return inst;
}

RegretReport measure_regret(const envs::LqParams& params, const RegretConfig& config,
                            std::uint64_t seed,
                            const std::optional<dmdmpc::PolicyFn>& shift_policy) {
  config.validate();
  Rng root(seed);
  Rng inst_rng = root.stream("instance");
  Rng start_rng = root.stream("start");
  Rng rng = root.stream("planner");
  const RegretInstance inst = make_instance(params, config.model_error, inst_rng);
  const envs::EnvSpec& spec = inst.true_env.spec();
  const EnvironmentDynamics model(inst.model_env);
  const dmdmpc::ValueFn value = quadratic_value(inst.riccati.P);
  const Matrix gain = config.shift_gain_scale * inst.riccati.K;
  const dmdmpc::PolicyFn policy =
      shift_policy ? *shift_policy : dmdmpc::PolicyFn([gain](const Matrix& s) -> Matrix {
        return -gain * s;
      });
  const Vector std = config.std_scale * spec.action_half_range();
  const std::vector<int> members{0};

  RegretReport rep;
  rep.seed = seed;
  rep.cost_bound = inst.cost_bound;
  rep.value_bound = inst.value_bound;
  rep.gamma = params.gamma;
  rep.horizon = config.horizon;
  rep.steps.reserve(config.steps);

  Vector x = inst.true_env.reset(start_rng);
  for (int t = 1; t <= config.steps; ++t) {
    const dmdmpc::ShiftResult shift = dmdmpc::shift_plan(policy, model, 0, x, config.horizon);
    const Matrix shifted = clip_rows(shift.means, spec);
    const dmdmpc::RolloutBatch batch =
        dmdmpc::rollout_batch(shifted, std, model, members, x, config.rollouts, params.gamma,
                              value, spec, rng);
    const dmdmpc::EliteSet elites = dmdmpc::select_elites(batch.costs, config.elite_fraction);
    const Matrix g = dmdmpc::aggregate_elites(batch, elites.indices, config.aggregation);
    const double alpha = config.step_schedule == StepSchedule::kConstant
                             ? config.alpha
                             : config.alpha / std::sqrt(static_cast<double>(t));
    const Matrix mu = dmdmpc::dmd_update(shifted, g, alpha, spec);
    const LqSolution oracle = lq_oracle(inst.problem, x, config.horizon);

    RegretStep s;
    s.t = t;
    s.alpha = alpha;
    s.model_cost = dmdmpc::sequence_cost(model, 0, x, shifted, params.gamma, value, rng);
    s.true_cost = lq_sequence_cost(inst.problem, x, mu);
    s.oracle_cost = oracle.cost;
    s.regret = s.true_cost - s.oracle_cost;
    s.comparator_gap = (oracle.actions - shifted).norm();
    s.gradient_norm = dmdmpc::objective_gradient(shifted, batch).norm();
    rep.total_regret += s.regret;
    rep.comparator_path_length += s.comparator_gap;
    s.cumulative = rep.total_regret;
    rep.max_gradient_norm = std::max(rep.max_gradient_norm, s.gradient_norm);

    const Vector u = mu.row(0).transpose();
    rep.max_step_error = std::max(rep.max_step_error, one_step_error(inst, x, u));
    x = inst.true_env.step(x, u).next_state;
    if (!x.allFinite() || x.norm() > 1e6 || !std::isfinite(s.regret)) {
      throw NumericError("measure_regret: closed loop diverged at t=" + std::to_string(t));
    }
    rep.steps.push_back(s);
  }
  rep.slope = loglog_slope(rep, config.slope_min_exponent, config.slope_max_exponent);
  return rep;
}

double loglog_slope(const RegretReport& report, int lo_exponent, int hi_exponent) {
  std::vector<double> xs, ys;
  for (int e = lo_exponent; e <= hi_exponent; ++e) {
    const std::size_t T = std::size_t{1} << e;
    if (T > report.steps.size()) break;
    const double re = report.steps[T - 1].cumulative;
    if (re > 0) {
      xs.push_back(std::log(static_cast<double>(T)));
      ys.push_back(std::log(re));
    }
  }
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto k = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / k;
    my += ys[i] / k;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

std::vector<ModelGapSample> model_gap_samples(const envs::LqParams& params,
                                              const RegretConfig& config, std::uint64_t seed) {
  config.validate();
  Rng root(seed);
  Rng inst_rng = root.stream("instance");
  Rng rng = root.stream("model-gap");
  const RegretInstance inst = make_instance(params, config.model_error, inst_rng);
  const envs::EnvSpec& spec = inst.true_env.spec();
  const auto n = params.A.rows();
  const auto m = params.B.cols();
  const Matrix& P = inst.riccati.P;

  std::vector<ModelGapSample> out;
  out.reserve(config.gap_rollouts);
  for (int i = 0; i < config.gap_rollouts; ++i) {
    ModelGapSample s;
    s.state.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      s.state[j] = rng.uniform(-config.gap_state_box, config.gap_state_box);
    }
    Matrix U(config.horizon, m);
    for (int h = 0; h < config.horizon; ++h) {
      for (Eigen::Index j = 0; j < m; ++j) U(h, j) = rng.uniform(spec.action_low[j], spec.action_high[j]);
    }
    Vector xm = s.state;
    Vector xt = s.state;
    double discount = 1.0;
    for (int h = 0; h < config.horizon; ++h) {
      const Vector u = U.row(h).transpose();
      s.max_step_error = std::max({s.max_step_error, one_step_error(inst, xm, u), one_step_error(inst, xt, u)});
      const envs::StepResult rm = inst.model_env.step(xm, u);
      const envs::StepResult rt = inst.true_env.step(xt, u);
      s.model_cost -= discount * rm.reward;
      s.true_cost -= discount * rt.reward;
      xm = rm.next_state;
      xt = rt.next_state;
      discount *= params.gamma;
    }
    s.model_cost += discount * xm.dot(P * xm);
    s.true_cost += discount * xt.dot(P * xt);
    s.bound = horizon_gap_bound(inst.cost_bound, inst.value_bound, params.gamma, config.horizon, s.max_step_error);
    out.push_back(std::move(s));
  }
  return out;
}

void write_regret_jsonl(const RegretReport& report, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  for (const RegretStep& s : report.steps) {
    nlohmann::json j = {{"type", "step"},          {"t", s.t},
                        {"model_cost", s.model_cost},    {"true_cost", s.true_cost},
                        {"oracle_cost", s.oracle_cost},  {"regret", s.regret},
                        {"total_regret", s.cumulative},    {"comparator_gap", s.comparator_gap},
                        {"alpha", s.alpha},        {"gradient_norm", s.gradient_norm}};
    f << j.dump() << '\n';
  }
  nlohmann::json summary = {{"type", "summary"},
                            {"seed", report.seed},
                            {"steps", report.steps.size()},
                            {"total_regret", report.total_regret},
                            {"comparator_path_length", report.comparator_path_length},
                            {"cost_bound", report.cost_bound},
                            {"value_bound", report.value_bound},
                            {"gamma", report.gamma},
                            {"horizon", report.horizon},
                            {"max_step_error", report.max_step_error},
                            {"max_gradient_norm", report.max_gradient_norm},
                            {"strong_convexity", "not computed"},
                            {"divergence_bound", "not computed"}};
  summary["slope"] = std::isfinite(report.slope) ? nlohmann::json(report.slope)
                                                  : nlohmann::json(nullptr);
  f << summary.dump() << '\n';
}

void write_regret_csv(const RegretReport& report, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f.precision(17);
  f << "T,total_regret,regret,comparator_path_length\n";
  double w = 0.0;
  for (const RegretStep& s : report.steps) {
    w += s.comparator_gap;
    f << s.t << ',' << s.cumulative << ',' << s.regret << ',' << w << '\n';
  }
}

}  // namespace demorl::regret

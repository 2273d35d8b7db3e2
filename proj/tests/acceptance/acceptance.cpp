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

// Acceptance runner. Each criterion prints one PASS/FAIL line; the exit code
// is nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "demorl/config/run_config.hpp"
#include "demorl/dmdmpc/planner.hpp"
#include "demorl/envs/lq.hpp"
#include "demorl/errors.hpp"
#include "demorl/model/ensemble.hpp"
#include "demorl/numerics/mlp.hpp"
#include "demorl/regret/lq_oracle.hpp"
#include "demorl/regret/regret.hpp"
#include "demorl/trainer/trainer.hpp"

namespace fs = std::filesystem;
using namespace demorl;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

fs::path acceptance_dir() { return DEMORL_ACCEPTANCE_DIR; }

config::RunConfig load(const std::string& name, const std::vector<std::string>& overrides = {}) {
  return config::load_config(acceptance_dir() / "configs" / name, overrides);
}

/// Scratch directory removed on scope exit.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag)
      : path_(fs::temp_directory_path() /
              ("demorl-acceptance-" + tag + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = quoted(DEMORL_CLI_PATH) + " -q " + args + " > " + quoted(log) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// 1 --------------------------------------------------------------------------

struct Architecture {
  std::string name;
  std::vector<int> sizes;
  Activation hidden;
};

/// Central difference of sum(g ⊙ f(x)), differencing the outputs before the
/// weighted sum to keep cancellation error down.
double central_difference(const MlpParams& up, const Matrix& x_up, const MlpParams& down,
                          const Matrix& x_down, const Matrix& g, double step) {
  const Matrix diff = mlp_forward_batch(up, x_up) - mlp_forward_batch(down, x_down);
  return (diff.array() * g.array()).sum() / (2 * step);
}

double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale < 1e-9) return std::abs(a - b) / 1e-9;
  return std::abs(a - b) / scale;
}

Outcome gradient_integrity() {
  // Shapes built by the trainer for each task with the default widths.
  std::vector<Architecture> archs;
  const struct {
    const char* env;
    int n, m;
  } tasks[] = {{"pendulum", 3, 1}, {"leg", 6, 2}, {"lq", 2, 1}};
  for (const auto& t : tasks) {
    const std::string e = t.env;
    archs.push_back({e + "/actor", {t.n, 256, 256, 2 * t.m}, Activation::kRelu});
    archs.push_back({e + "/critic", {t.n + t.m, 256, 256, 1}, Activation::kRelu});
    archs.push_back({e + "/model", {t.n + t.m, 200, 200, t.n + 1}, Activation::kRelu});
    archs.push_back({e + "/model-nll", {t.n + t.m, 200, 200, 2 * (t.n + 1)}, Activation::kRelu});
    archs.push_back({e + "/actor-small-tanh", {t.n, 64, 64, 2 * t.m}, Activation::kTanh});
  }
  constexpr int kCases = 100;
  constexpr double kStep = 1e-6;
  constexpr double kTol = 1e-4;
  Rng rng(20260101);
  double worst = 0.0;
  std::string worst_arch;
  int failures = 0;
  for (const auto& arch : archs) {
    for (int c = 0; c < kCases; ++c) {
      MlpParams p = make_mlp(arch.sizes, arch.hidden, Activation::kLinear, rng);
      const int batch = 1 + static_cast<int>(rng.index(4));
      const Matrix x = standard_normal(rng, arch.sizes.front(), batch);
      const Matrix g = standard_normal(rng, arch.sizes.back(), batch);
      const MlpBackward back = mlp_backward(p, mlp_forward_tape(p, x), g);
      const std::vector<double> analytic = flatten(back.param_grads);

      // one parameter coordinate and one input coordinate per case
      std::vector<double> flat = flatten(p);
      const std::size_t i = rng.index(flat.size());
      const double saved = flat[i];
      MlpParams up = p, down = p;
      flat[i] = saved + kStep;
      unflatten(flat, up);
      flat[i] = saved - kStep;
      unflatten(flat, down);
      const double err_p =
          relative_error(analytic[i], central_difference(up, x, down, x, g, kStep));

      const Eigen::Index r = static_cast<Eigen::Index>(rng.index(x.rows()));
      const Eigen::Index col = static_cast<Eigen::Index>(rng.index(x.cols()));
      Matrix xp = x, xm = x;
      xp(r, col) += kStep;
      xm(r, col) -= kStep;
      const double err_x =
          relative_error(back.input_grad(r, col), central_difference(p, xp, p, xm, g, kStep));

      const double err = std::max(err_p, err_x);
      if (err >= kTol) ++failures;
      if (err > worst) {
        worst = err;
        worst_arch = arch.name;
      }
    }
  }
  return {failures == 0,
          fmt("%zu architectures x %d cases, max rel err %.2e (%s), %d above %.0e",
              archs.size(), kCases, worst, worst_arch.c_str(), failures, kTol)};
}

// 2 --------------------------------------------------------------------------

Outcome update_identities() {
  Rng rng(7);
  envs::EnvSpec spec;
  spec.action_dim = 3;
  spec.action_low = Vector::Constant(3, -2.0);
  spec.action_high = Vector::Constant(3, 2.0);
  int exact_failures = 0;
  int contraction_failures = 0;
  double worst_contraction = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int h = 1 + static_cast<int>(rng.index(15));
    Matrix shifted(h, 3), g(h, 3);
    for (Eigen::Index i = 0; i < shifted.size(); ++i) {
      shifted(i) = rng.uniform(-2, 2);
      g(i) = rng.uniform(-2, 2);
    }
    if (dmdmpc::dmd_update(shifted, g, 0.0, spec) != shifted) ++exact_failures;
    if (dmdmpc::dmd_update(shifted, g, 1.0, spec) != g) ++exact_failures;

    // Unclipped mix. Equality holds in exact arithmetic; the floating-point
    // residual is bounded by a few ulps of the operands.
    const double alpha = rng.uniform();
    Matrix wide_shifted = 10.0 * shifted;
    const Matrix mu = dmdmpc::dmd_mix(wide_shifted, g, alpha);
    const double lhs = (mu - g).norm();
    const double rhs = (1 - alpha) * (wide_shifted - g).norm();
    const double scale = wide_shifted.norm() + g.norm();
    const double resid = std::abs(lhs - rhs) / scale;
    worst_contraction = std::max(worst_contraction, resid);
    if (resid > 8 * std::numeric_limits<double>::epsilon()) ++contraction_failures;
  }

  int soft_failures = 0;
  const int sizes[] = {5, 32, 32, 2};
  for (int t = 0; t < 20; ++t) {
    const MlpParams online = make_mlp(sizes, Activation::kRelu, Activation::kLinear, rng);
    const MlpParams target0 = make_mlp(sizes, Activation::kRelu, Activation::kLinear, rng);
    MlpParams target = target0;
    soft_update(target, online, 0.0);
    if (flatten(target) != flatten(target0)) ++soft_failures;
    soft_update(target, online, 1.0);
    if (flatten(target) != flatten(online)) ++soft_failures;
  }
  const bool pass = exact_failures == 0 && contraction_failures == 0 && soft_failures == 0;
  return {pass, fmt("alpha 0/1 mismatches %d, contraction max residual %.2e x scale "
                    "(%d over 8 eps), tau 0/1 mismatches %d",
                    exact_failures, worst_contraction, contraction_failures, soft_failures)};
}

// 3 --------------------------------------------------------------------------

std::vector<int> brute_force_elites(const Vector& costs, double p) {
  std::vector<int> order;
  for (int i = 0; i < costs.size(); ++i) {
    if (std::isfinite(costs[i])) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return costs[a] < costs[b]; });
  const int m = static_cast<int>(costs.size());
  const int want = std::max(1, static_cast<int>(std::floor(p * m + 1e-9)));
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(want)));
  return order;
}

Outcome elite_selection() {
  const double fractions[] = {0.01, 0.05, 0.1, 0.2, 0.5, 1.0};
  Rng rng(3);
  int mismatches = 0;
  int cases = 0;
  for (int t = 0; t < 10000; ++t) {
    const int m = 1 + static_cast<int>(rng.index(400));
    Vector costs(m);
    const int style = static_cast<int>(rng.index(3));
    for (int i = 0; i < m; ++i) {
      // continuous, heavily tied, or with non-finite entries
      if (style == 0) costs[i] = rng.normal();
      else if (style == 1) costs[i] = static_cast<double>(rng.index(5));
      else costs[i] = rng.uniform() < 0.2 ? std::nan("") : rng.normal();
    }
    if (style == 2 && !costs.array().isFinite().any()) costs[0] = 0.0;
    const double p = fractions[t % 6];
    ++cases;
    const auto expect = brute_force_elites(costs, p);
    const auto got = dmdmpc::select_elites(costs, p);
    if (got.indices != expect || got.threshold != costs[expect.back()]) ++mismatches;
  }
  return {mismatches == 0, fmt("%d random cost vectors, %d mismatches", cases, mismatches)};
}

// 4 --------------------------------------------------------------------------

/// State is the step counter; reward -|u - c_h|² makes the sequence cost the
/// quadratic |U - c|².
class QuadraticSynthetic final : public dmdmpc::DynamicsModel {
 public:
  explicit QuadraticSynthetic(Matrix c) : c_(std::move(c)) {}
  int state_dim() const override { return 1; }
  int action_dim() const override { return static_cast<int>(c_.cols()); }
  std::vector<int> planning_members() const override { return {0}; }
  void step(int, const Matrix& s, const Matrix& a, Matrix& next, Vector& r) const override {
    next = s.array() + 1.0;
    r.resize(a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const auto h = static_cast<Eigen::Index>(s(0, j));
      r[j] = -(a.col(j) - c_.row(h).transpose()).squaredNorm();
    }
  }

 private:
  Matrix c_;
};

Outcome score_function_gradient() {
  // Small instance: the estimator's own standard error at M=1e5 is about 1.5%,
  // so a 5% miss is evidence of bias rather than sampling noise.
  constexpr int kSamples = 100000;
  const int horizon = 3, m = 1;
  envs::EnvSpec spec;
  spec.action_dim = m;
  spec.action_low = Vector::Constant(m, -1e3);
  spec.action_high = Vector::Constant(m, 1e3);
  double worst = 0.0, worst_se = 0.0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    Rng rng(seed);
    Matrix c(horizon, m), shifted(horizon, m);
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      c(i) = rng.uniform(-1, 1);
      const double offset = rng.uniform(0.5, 1.0);
      shifted(i) = c(i) + (rng.uniform() < 0.5 ? -offset : offset);
    }
    const Vector std = Vector::Constant(m, 0.5);
    const QuadraticSynthetic model(c);
    const auto batch = dmdmpc::rollout_batch(shifted, std, model, {0}, Vector::Zero(1),
                                             kSamples, 1.0, nullptr, spec, rng);
    const Matrix est = dmdmpc::objective_gradient(shifted, batch);
    Matrix exact = 2.0 * (shifted - c);
    for (int j = 0; j < m; ++j) exact.col(j) *= std[j] * std[j];
    worst = std::max(worst, (est - exact).norm() / exact.norm());

    // sample standard error of the estimate, as a fraction of the exact norm
    Matrix second = Matrix::Zero(horizon, m);
    for (int i = 0; i < batch.count; ++i) {
      const Matrix term = batch.costs[i] * (batch.sequence(i) - shifted);
      second += term.cwiseProduct(term);
    }
    const Matrix var = second / kSamples - est.cwiseProduct(est);
    worst_se = std::max(worst_se, std::sqrt(var.sum() / kSamples) / exact.norm());
  }
  return {worst < 0.05, fmt("3 seeds at M=%d, max relative error %.4f (limit 0.05), "
                            "sampling standard error %.4f",
                            kSamples, worst, worst_se)};
}

// 5 --------------------------------------------------------------------------

/// Independent draws: states uniform on a box, actions uniform on the bounds.
buffers::TransitionBatch lq_transitions(const envs::LinearQuadratic& env, int count, Rng& rng) {
  const auto& spec = env.spec();
  buffers::TransitionBatch b;
  b.resize(spec.state_dim, spec.action_dim, count);
  for (int j = 0; j < count; ++j) {
    Vector x(spec.state_dim), u(spec.action_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-2, 2);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u[i] = rng.uniform(spec.action_low[i], spec.action_high[i]);
    }
    const auto r = env.step(x, u);
    b.states.col(j) = x;
    b.actions.col(j) = u;
    b.rewards[j] = r.reward;
    b.next_states.col(j) = r.next_state;
    b.dones[j] = 0.0;
  }
  return b;
}

Outcome model_fidelity() {
  const envs::LinearQuadratic env;
  Rng rng(5);
  const auto train = lq_transitions(env, 2000, rng);
  const auto held_out = lq_transitions(env, 1000, rng);
  model::EnsembleConfig cfg;  // default widths
  cfg.epochs = 400;
  model::EnsembleModel ensemble(2, 1, cfg, rng);
  model::train_ensemble(ensemble, train, rng);
  double worst = 0.0, sum = 0.0;
  for (int k : ensemble.elites()) {
    const double mse = model::evaluate_mse(ensemble, k, held_out);
    worst = std::max(worst, mse);
    sum += mse;
  }
  const double mean = sum / static_cast<double>(ensemble.elites().size());
  return {worst < 1e-3, fmt("held-out one-step MSE over %zu elites: mean %.2e, worst %.2e "
                            "(limit 1e-3)",
                            ensemble.elites().size(), mean, worst)};
}

// 6 --------------------------------------------------------------------------

Outcome planner_improvement() {
  const envs::LinearQuadratic env;
  const auto& p = env.params();
  const auto riccati = regret::discounted_riccati(p.A, p.B, p.Q, p.R, p.gamma);
  const Matrix gain = 0.5 * riccati.K;
  const dmdmpc::PolicyFn shift = [gain](const Matrix& x) { return Matrix(-gain * x); };
  const Matrix terminal = riccati.P;
  const dmdmpc::ValueFn value = [terminal](const Matrix& x, Rng&) {
    return Vector(-(x.array() * (terminal * x).array()).colwise().sum().transpose());
  };
  const dmdmpc::EnvironmentDynamics truth(env);
  dmdmpc::PlannerConfig cfg;
  cfg.gamma = p.gamma;
  Rng rng(6);
  int improved = 0;
  constexpr int kStarts = 100;
  for (int i = 0; i < kStarts; ++i) {
    Vector x0(2);
    x0 << rng.uniform(-3, 3), rng.uniform(-3, 3);
    const auto r = dmdmpc::plan(x0, shift, value, truth, cfg, env.spec(), rng);
    Rng unused(0);
    const double planned =
        dmdmpc::sequence_cost(truth, 0, x0, r.plan.means, cfg.gamma, value, unused);
    const double shifted =
        dmdmpc::sequence_cost(truth, 0, x0, r.shifted, cfg.gamma, value, unused);
    improved += planned <= shifted;
  }
  return {improved >= 95, fmt("plan cost <= shifted cost on %d of %d start states (need 95)",
                              improved, kStarts)};
}

// 7 --------------------------------------------------------------------------

Outcome model_gap_bound() {
  const auto params = envs::LqParams::defaults();
  regret::RegretConfig cfg;
  cfg.gap_rollouts = 1000;
  const auto samples = regret::model_gap_samples(params, cfg, 7);
  int violations = 0;
  double worst_ratio = 0.0;
  for (const auto& s : samples) {
    const double gap = s.model_cost - s.true_cost;
    if (gap > s.bound || -gap > s.bound) ++violations;
    if (s.bound > 0) worst_ratio = std::max(worst_ratio, std::abs(gap) / s.bound);
  }
  const double zero = regret::horizon_gap_bound(12.0, 30.0, 0.99, 5, 0.0);
  const bool pass = violations == 0 && zero == 0.0 && samples.size() == 1000;
  return {pass, fmt("%zu rollouts, %d bound violations, max |gap|/bound %.3f, "
                    "bound at zero error %g",
                    samples.size(), violations, worst_ratio, zero)};
}

// 8 --------------------------------------------------------------------------

Outcome regret_sublinearity() {
  const auto params = envs::LqParams::defaults();
  const regret::RegretConfig cfg;
  std::string detail = "slopes";
  bool pass = true;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto report = regret::measure_regret(params, cfg, seed);
    const double slope =
        regret::loglog_slope(report, cfg.slope_min_exponent, cfg.slope_max_exponent);
    pass = pass && slope < 1.0;
    detail += fmt(" %.3f", slope);
  }
  return {pass, detail + " (each must be < 1)"};
}

// 9, 10 ----------------------------------------------------------------------

struct RunTrace {
  std::vector<trainer::EpochReport> reports;
  double steps_to_threshold = kInf;
};

RunTrace train(const config::RunConfig& cfg, std::uint64_t seed) {
  trainer::Trainer t(cfg, seed);
  RunTrace trace;
  for (int e = 0; e < cfg.epochs; ++e) {
    trace.reports.push_back(t.run_epoch());
    const auto& r = trace.reports.back();
    if (cfg.threshold && r.eval.mean_return >= *cfg.threshold) {
      trace.steps_to_threshold = static_cast<double>(r.env_steps);
      break;
    }
  }
  return trace;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome pendulum_acceleration() {
  const std::uint64_t seeds[] = {0, 1, 2};
  std::vector<double> ours, base;
  int wins = 0;
  std::string per_seed;
  for (auto seed : seeds) {
    const auto a = train(load("pendulum.yaml", {"mode=demorl"}), seed);
    const auto b = train(load("pendulum.yaml", {"mode=sac-baseline"}), seed);
    ours.push_back(a.steps_to_threshold);
    base.push_back(b.steps_to_threshold);
    wins += a.steps_to_threshold < b.steps_to_threshold;
    per_seed += fmt(" s%llu %g/%g", static_cast<unsigned long long>(seed), a.steps_to_threshold,
                    b.steps_to_threshold);
  }
  return {wins >= 2, fmt("env steps to -200 (demorl/baseline):%s; demorl faster on %d of 3, "
                         "medians %g vs %g",
                         per_seed.c_str(), wins, median(ours), median(base))};
}

Outcome leg_tracking() {
  const std::uint64_t seeds[] = {0, 1, 2};
  double err[2] = {0, 0}, rps[2] = {0, 0};
  const char* modes[] = {"mode=demorl", "mode=sac-baseline"};
  for (int k = 0; k < 2; ++k) {
    for (auto seed : seeds) {
      const auto trace = train(load("leg.yaml", {modes[k]}), seed);
      err[k] += trace.reports.back().eval.tracking_error / 3.0;
      rps[k] += trace.reports.back().eval.reward_per_step / 3.0;
    }
  }
  const bool pass = err[0] < err[1] && rps[0] >= 1.2 * rps[1];
  return {pass, fmt("after 20 epochs, tracking error %.4f m vs %.4f m, reward per step "
                    "%.4f vs %.4f (ratio %.3f, need 1.2)",
                    err[0], err[1], rps[0], rps[1], rps[0] / rps[1])};
}

// 11 -------------------------------------------------------------------------

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

Outcome ablation_harness() {
  ScratchDir dir("ablate");
  const fs::path cfg = acceptance_dir() / "configs" / "ablate.yaml";
  const int code = run_cli("ablate -c " + quoted(cfg) + " --seed 0 -s output_dir=" +
                               quoted(dir.path() / "out"),
                           dir.path() / "log.txt");
  if (code != 0) return {false, fmt("ablate exited with %d", code)};
  const auto lines = split(slurp(dir.path() / "out" / "ablation.csv"), '\n');
  const std::string header =
      "elite_fraction,seed,epochs_to_threshold,env_steps_to_threshold,final_eval_return,"
      "best_eval_return";
  if (lines.empty() || lines[0] != header) return {false, "unexpected ablation.csv header"};
  const double fractions[] = {0.01, 0.05, 0.1, 0.2, 0.5, 1.0};
  int rows = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i], ',');
    if (f.size() != 6 || rows >= 6) return {false, "malformed row: " + lines[i]};
    if (!is_number(f[0]) || std::abs(std::stod(f[0]) - fractions[rows]) > 1e-12) {
      return {false, "unexpected elite fraction in row: " + lines[i]};
    }
    if (f[1] != "0") return {false, "unexpected seed in row: " + lines[i]};
    // threshold columns are empty when the run never got there
    const bool reached = !f[2].empty();
    if (reached != !f[3].empty() || (reached && (!is_number(f[2]) || !is_number(f[3])))) {
      return {false, "inconsistent threshold columns: " + lines[i]};
    }
    if (!is_number(f[4]) || !is_number(f[5])) return {false, "non-numeric return: " + lines[i]};
    ++rows;
  }
  return {rows == 6, fmt("ablation.csv has the expected header and %d of 6 rows", rows)};
}

// 12 -------------------------------------------------------------------------

Outcome determinism() {
  ScratchDir dir("determinism");
  const fs::path cfg = acceptance_dir() / "configs" / "smoke.yaml";
  std::string contents[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path out = dir.path() / ("run" + std::to_string(k));
    const int code = run_cli("train -c " + quoted(cfg) + " --seed 3 -s output_dir=" + quoted(out),
                             dir.path() / "log.txt");
    if (code != 0) return {false, fmt("train run %d exited with %d", k, code)};
    contents[k] = slurp(out / "seed-3" / "metrics.csv");
  }
  const auto rows = split(contents[0], '\n').size();
  const bool pass = !contents[0].empty() && contents[0] == contents[1];
  return {pass, fmt("two runs of seed 3: metrics.csv %s (%zu bytes, %zu lines)",
                    pass ? "identical" : "differ", contents[0].size(), rows)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "gradient-integrity", gradient_integrity},
      {2, "update-identities", update_identities},
      {3, "elite-selection", elite_selection},
      {4, "score-function-gradient", score_function_gradient},
      {5, "model-fidelity", model_fidelity},
      {6, "planner-improvement", planner_improvement},
      {7, "model-gap-bound", model_gap_bound},
      {8, "regret-sublinearity", regret_sublinearity},
      {9, "pendulum-acceleration", pendulum_acceleration},
      {10, "leg-tracking", leg_tracking},
      {11, "ablation-harness", ablation_harness},
      {12, "determinism", determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"demorl acceptance criteria"};
  std::vector<int> selected;
  bool list = false;
  app.add_option("-c,--criterion", selected, "Criterion numbers to run (default: all)")
      ->check(CLI::Range(1, 12));
  app.add_flag("--list", list, "List the criteria and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& c : criteria()) std::printf("%2d %s\n", c.id, c.name);
    return 0;
  }
  spdlog::set_level(spdlog::level::warn);
  int failed = 0;
  for (const auto& c : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %-24s %s  %s [%.1f s]\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

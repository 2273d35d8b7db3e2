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

#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "demorl/config/metrics.hpp"
#include "demorl/config/run_config.hpp"
#include "demorl/errors.hpp"
#include "demorl/numerics/archive.hpp"
#include "demorl/regret/regret.hpp"
#include "demorl/sac/agent.hpp"
#include "demorl/trainer/run.hpp"
#include "demorl/trainer/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using demorl::config::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void on_sigint(int) { demorl::trainer::stop_flag().store(true); }

std::string format_fraction(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", p);
  return buf;
}

std::string format_real(double v) { return demorl::config::format_real(v); }

// Runs the tasks on up to `jobs` threads. Each task owns its output directory.
void run_parallel(std::vector<std::function<void()>> tasks, int jobs) {
  if (jobs <= 1 || tasks.size() <= 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (failure || next == tasks.size()) return;
        i = next++;
      }
      try {
        tasks[i]();
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks.size());
  for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::vector<std::uint64_t> seeds;
  int jobs = 1;

  RunConfig load() const {
    RunConfig cfg = demorl::config::load_config(config_path, overrides);
    if (!seeds.empty()) cfg.seeds = seeds;
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "Run configuration (YAML)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", c.overrides, "Override a config key, e.g. --set planner.horizon=10");
  cmd->add_option("--seed", c.seeds, "Seeds to run (replaces the config list)");
  cmd->add_option("-j,--jobs", c.jobs, "Seeds trained concurrently")->check(CLI::PositiveNumber);
}

int cmd_train(const Common& common, const std::optional<std::string>& resume) {
  RunConfig cfg = common.load();
  demorl::trainer::RunOptions options;
  if (resume) {
    const demorl::Archive ar = demorl::Archive::load(*resume);
    const std::uint64_t seed = ar.u64s("trainer.counters").at(0);
    options.resume = fs::path(*resume);
    const fs::path dir = demorl::config::resolve_output_dir(cfg) / ("seed-" + std::to_string(seed));
    const auto result = demorl::trainer::run_seed(cfg, seed, dir, options);
    std::printf("seed %llu: %zu epochs run, output in %s\n",
                static_cast<unsigned long long>(seed), result.reports.size(),
                dir.string().c_str());
    return result.interrupted ? kExitRuntime : kExitOk;
  }

  const fs::path root = demorl::config::resolve_output_dir(cfg);
  fs::create_directories(root);
  std::ofstream(root / "config.resolved.yaml") << demorl::config::to_yaml(cfg);
  std::vector<demorl::trainer::SeedResult> results(cfg.seeds.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    tasks.emplace_back([&, i] {
      const auto seed = cfg.seeds[i];
      results[i] = demorl::trainer::run_seed(cfg, seed, root / ("seed-" + std::to_string(seed)),
                                             options);
    });
  }
  run_parallel(std::move(tasks), common.jobs);

  bool interrupted = false;
  for (const auto& r : results) {
    interrupted |= r.interrupted;
    const double last = r.reports.empty() ? std::nan("") : r.reports.back().eval.mean_return;
    std::printf("seed %llu: final eval return %s", static_cast<unsigned long long>(r.seed),
                format_real(last).c_str());
    if (cfg.threshold) {
      if (r.threshold_env_steps) {
        std::printf(", threshold %g reached after %llu env steps", *cfg.threshold,
                    static_cast<unsigned long long>(*r.threshold_env_steps));
      } else {
        std::printf(", threshold %g not reached", *cfg.threshold);
      }
    }
    std::printf("\n");
  }
  std::printf("output: %s\n", root.string().c_str());
  return interrupted ? kExitRuntime : kExitOk;
}

int cmd_ablate(const Common& common, std::vector<double> fractions) {
  RunConfig cfg = common.load();
  if (fractions.empty()) fractions = cfg.ablate_fractions;
  if (!cfg.threshold) {
    throw demorl::ConfigError("threshold", 0, "ablation needs an eval-return threshold");
  }
  for (double p : fractions) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw demorl::ConfigError("ablate_fractions", 0,
                                "elite fraction " + format_fraction(p) + " is outside (0, 1]");
    }
  }

  const fs::path root = demorl::config::resolve_output_dir(cfg);
  fs::create_directories(root);
  struct Cell {
    double p = 0.0;
    std::uint64_t seed = 0;
    demorl::trainer::SeedResult result;
  };
  std::vector<Cell> cells;
  for (double p : fractions) {
    for (auto seed : cfg.seeds) cells.push_back({p, seed, {}});
  }
  std::vector<std::function<void()>> tasks;
  for (auto& cell : cells) {
    tasks.emplace_back([&cfg, &root, &cell] {
      RunConfig run = cfg;
      run.planner.elite_fraction = cell.p;
      const fs::path dir = root / ("p-" + format_fraction(cell.p)) /
                           ("seed-" + std::to_string(cell.seed));
      cell.result = demorl::trainer::run_seed(run, cell.seed, dir);
    });
  }
  run_parallel(std::move(tasks), common.jobs);

  const fs::path table = root / "ablation.csv";
  std::ofstream out(table);
  out << "elite_fraction,seed,epochs_to_threshold,env_steps_to_threshold,final_eval_return,"
         "best_eval_return\n";
  std::printf("%-8s %-6s %-10s %-12s %s\n", "p", "seed", "epochs", "env_steps", "final_return");
  for (const auto& c : cells) {
    const auto& r = c.result;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& e : r.reports) best = std::max(best, e.eval.mean_return);
    const double last = r.reports.empty() ? std::nan("") : r.reports.back().eval.mean_return;
    const std::string epochs = r.threshold_epoch ? std::to_string(*r.threshold_epoch + 1) : "";
    const std::string steps = r.threshold_env_steps ? std::to_string(*r.threshold_env_steps) : "";
    out << format_fraction(c.p) << ',' << c.seed << ',' << epochs << ',' << steps << ','
        << format_real(last) << ',' << format_real(r.reports.empty() ? std::nan("") : best)
        << '\n';
    std::printf("%-8s %-6llu %-10s %-12s %.2f\n", format_fraction(c.p).c_str(),
                static_cast<unsigned long long>(c.seed), epochs.empty() ? "-" : epochs.c_str(),
                steps.empty() ? "-" : steps.c_str(), last);
  }
  std::printf("table: %s\n", table.string().c_str());
  return kExitOk;
}

int cmd_regret(const Common& common) {
  RunConfig cfg = common.load();
  const fs::path root = demorl::config::resolve_output_dir(cfg);
  fs::create_directories(root);
  std::ofstream(root / "config.resolved.yaml") << demorl::config::to_yaml(cfg);
  std::vector<demorl::regret::RegretReport> reports(cfg.seeds.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    tasks.emplace_back([&, i] {
      const auto seed = cfg.seeds[i];
      reports[i] = demorl::regret::measure_regret(cfg.lq, cfg.regret, seed);
      const fs::path dir = root / ("seed-" + std::to_string(seed));
      fs::create_directories(dir);
      demorl::regret::write_regret_jsonl(reports[i], dir / "regret.jsonl");
      demorl::regret::write_regret_csv(reports[i], dir / "regret.csv");
    });
  }
  run_parallel(std::move(tasks), common.jobs);

  std::ofstream summary(root / "regret_summary.csv");
  summary << "seed,steps,total_regret,regret_per_step,slope,comparator_path_length\n";
  for (const auto& r : reports) {
    const double per_step = r.total_regret / static_cast<double>(cfg.regret.steps);
    summary << r.seed << ',' << cfg.regret.steps << ',' << format_real(r.total_regret) << ','
            << format_real(per_step) << ',' << format_real(r.slope) << ','
            << format_real(r.comparator_path_length) << '\n';
    std::printf("seed %llu: regret %.6g, per step %.3g, log-log slope %.4f, path length %.4g\n",
                static_cast<unsigned long long>(r.seed), r.total_regret, per_step, r.slope, r.comparator_path_length);
  }
  std::printf("output: %s\n", root.string().c_str());
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, int episodes, std::optional<std::uint64_t> seed,
             const std::vector<std::string>& overrides) {
  const demorl::Archive ar = demorl::Archive::load(checkpoint);
  RunConfig cfg = demorl::config::parse_config(ar.text("config"), overrides);
  const auto env = demorl::config::make_env(cfg);
  const auto agent = demorl::sac::SacAgent::load(ar, "agent.", cfg.sac);
  const std::uint64_t s = seed.value_or(ar.u64s("trainer.counters").at(0));
  const auto result =
      demorl::trainer::evaluate(*env, agent, episodes, demorl::Rng(s).stream("eval"));

  const bool tracking = std::isfinite(result.tracking_error);
  std::printf("%-8s %s\n", "episode", "return");
  for (std::size_t i = 0; i < result.returns.size(); ++i) {
    std::printf("%-8zu %.6f\n", i, result.returns[i]);
  }
  std::printf("return: %.6f +- %.6f over %d episode(s)\n", result.mean_return, result.std_return,
              episodes);
  std::printf("reward per step: %.6f\n", result.reward_per_step);
  if (tracking) std::printf("tracking error: %.6f m\n", result.tracking_error);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"demorl: model-accelerated actor-critic training and diagnostics"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  Common train_opts;
  std::optional<std::string> resume;
  auto* train = app.add_subcommand("train", "Train one or more seeds");
  add_common(train, train_opts);
  train->add_option("--resume", resume, "Continue from a checkpoint")->check(CLI::ExistingFile);

  Common ablate_opts;
  std::vector<double> fractions;
  auto* ablate = app.add_subcommand("ablate", "Sweep the planner elite fraction");
  add_common(ablate, ablate_opts);
  ablate->add_option("-p,--fractions", fractions, "Elite fractions in (0, 1]");

  Common regret_opts;
  auto* regret = app.add_subcommand("regret", "Run the linear-quadratic regret harness");
  add_common(regret, regret_opts);

  std::string checkpoint;
  int episodes = 5;
  std::optional<std::uint64_t> eval_seed;
  std::vector<std::string> eval_overrides;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint deterministically");
  eval->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("-n,--episodes", episodes, "Episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "Evaluation seed (defaults to the run seed)");
  eval->add_option("-s,--set", eval_overrides, "Override a config key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);
  std::signal(SIGINT, on_sigint);

  try {
    if (*train) return cmd_train(train_opts, resume);
    if (*ablate) return cmd_ablate(ablate_opts, fractions);
    if (*regret) return cmd_regret(regret_opts);
    if (*eval) return cmd_eval(checkpoint, episodes, eval_seed, eval_overrides);
  } catch (const demorl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const demorl::IntegrityError& e) {
    std::fprintf(stderr, "integrity error: %s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}

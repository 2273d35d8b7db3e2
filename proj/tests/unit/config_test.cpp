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

#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "demorl/config/metrics.hpp"
#include "demorl/config/run_config.hpp"
#include "demorl/errors.hpp"

namespace demorl::config {
namespace {

TEST(RunConfig, MissingEnvNamesTheField) {
  try {
    parse_config("epochs: 3\n");
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "env");
  }
}

TEST(RunConfig, UnknownKeyReportsLine) {
  try {
    parse_config("env: pendulum\nplanner:\n  rollouts: 10\n  elite_frac: 0.2\n");
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "planner.elite_frac");
    EXPECT_EQ(e.line(), 4);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
}

TEST(RunConfig, BadValueReportsLine) {
  try {
    parse_config("env: pendulum\nplanner:\n  elite_fraction: 1.5\n");
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_config("env: pendulum\nepochs: many\n"), ConfigError);
  EXPECT_THROW(parse_config("env: pendulum\nmode: dqn\n"), ConfigError);
  EXPECT_THROW(parse_config("env: mujoco\n"), ConfigError);
  EXPECT_THROW(parse_config("env: [\n"), ConfigError);
}

TEST(RunConfig, DefaultsAndValues) {
  const auto c = parse_config(
      "env: leg\nmode: sac-baseline\nseeds: [1, 2, 3]\nplanner:\n  aggregation: uniform\n"
      "sac:\n  hidden: [64, 64]\nthreshold: -150\n");
  EXPECT_EQ(c.env, "leg");
  EXPECT_EQ(c.mode, Mode::kSacBaseline);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(c.planner.aggregation, dmdmpc::Aggregation::kUniform);
  EXPECT_EQ(c.sac.hidden, (std::vector<int>{64, 64}));
  ASSERT_TRUE(c.threshold.has_value());
  EXPECT_EQ(*c.threshold, -150.0);
  EXPECT_EQ(c.epochs, 20);
  EXPECT_EQ(c.planner.elite_fraction, 0.1);
  EXPECT_EQ(c.ablate_fractions, (std::vector<double>{0.01, 0.05, 0.10, 0.20, 0.50, 1.00}));
  EXPECT_FALSE(c.mix_ratio.has_value());
}

TEST(RunConfig, OverridesApplyOnTop) {
  const auto c = parse_config("env: pendulum\nepochs: 3\n",
                              {"epochs=7", "planner.rollouts=33", "sac.hidden=[8, 8]",
                               "mix_ratio=0.25"});
  EXPECT_EQ(c.epochs, 7);
  EXPECT_EQ(c.planner.rollouts, 33);
  EXPECT_EQ(c.sac.hidden, (std::vector<int>{8, 8}));
  EXPECT_EQ(*c.mix_ratio, 0.25);
  EXPECT_THROW(parse_config("env: pendulum\n", {"planner.nope=1"}), ConfigError);
  EXPECT_THROW(parse_config("env: pendulum\n", {"epochs"}), ConfigError);
}

TEST(RunConfig, ResolvedYamlRoundTrips) {
  const auto c = parse_config(
      "env: lq\nseeds: [4]\nlq:\n  A: [[0.9, 0.2], [0, 0.8]]\n  gamma: 0.95\n"
      "regret:\n  model_error: 0.03\n  step_schedule: constant\nplanner:\n  temperature: 0.7\n");
  const std::string text = to_yaml(c);
  const auto back = parse_config(text);
  EXPECT_EQ(to_yaml(back), text);
  EXPECT_EQ(back.lq.A, c.lq.A);
  EXPECT_EQ(back.regret.step_schedule, regret::StepSchedule::kConstant);
  EXPECT_EQ(*back.planner.temperature, 0.7);
  EXPECT_EQ(back.lq.gamma, 0.95);
}

TEST(RunConfig, OutputRootFromEnvironment) {
  auto c = parse_config("env: pendulum\noutput_dir: runs/x\n");
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(resolve_output_dir(c), std::filesystem::path("runs/x"));
  ::setenv(kOutputRootEnv, "/tmp/root", 1);
  EXPECT_EQ(resolve_output_dir(c), std::filesystem::path("/tmp/root/runs/x"));
  c.output_dir = "/abs/dir";
  EXPECT_EQ(resolve_output_dir(c), std::filesystem::path("/abs/dir"));
  ::unsetenv(kOutputRootEnv);
}

TEST(RunConfig, MakeEnvUsesConfiguredConstants) {
  const auto c = parse_config("env: pendulum\npendulum:\n  max_torque: 3.5\n");
  const auto env = make_env(c);
  EXPECT_EQ(env->name(), "pendulum");
  EXPECT_EQ(env->spec().action_high[0], 3.5);
}

TEST(Metrics, ColumnRegistryIsStable) {
  const std::vector<std::string> expected = {
      "epoch", "env_steps", "eval_return", "eval_return_std", "eval_reward_per_step",
      "eval_tracking_error", "train_return", "critic_loss", "actor_loss", "temperature_loss",
      "temperature", "sac_updates", "model_trained", "model_train_loss", "model_val_loss",
      "horizon", "mpc_budget", "mpc_transitions", "planner_calls", "mean_elite_cost",
      "dropped_trajectories", "shift_truncations", "planner_degenerate", "mix_ratio"};
  EXPECT_EQ(metrics_columns(), expected);
  std::set<std::string> unique(expected.begin(), expected.end());
  EXPECT_EQ(unique.size(), expected.size());
  EXPECT_EQ(metrics_header().substr(0, 16), "epoch,env_steps,");
}

TEST(Metrics, RowHasOneFieldPerColumn) {
  trainer::EpochReport r;
  r.eval.tracking_error = std::nan("");
  const std::string row = metrics_row(r);
  EXPECT_EQ(static_cast<std::size_t>(std::count(row.begin(), row.end(), ',')) + 1,
            metrics_columns().size());
  EXPECT_NE(row.find("nan"), std::string::npos);
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
}

}  // namespace
}  // namespace demorl::config

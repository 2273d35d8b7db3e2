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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "demorl/dmdmpc/planner.hpp"
#include "demorl/envs/leg.hpp"
#include "demorl/envs/lq.hpp"
#include "demorl/envs/pendulum.hpp"
#include "demorl/model/ensemble.hpp"
#include "demorl/regret/regret.hpp"
#include "demorl/sac/agent.hpp"
#include "demorl/trainer/schedule.hpp"

namespace demorl::config {

enum class Mode { kDemorl, kSacBaseline };
std::string_view to_string(Mode m);

/// Everything a run needs. Defaults are the documented values; `env` has no
/// default and must be set.
struct RunConfig {
  std::string env;
  Mode mode = Mode::kDemorl;
  std::vector<std::uint64_t> seeds = {0};
  int epochs = 20;
  int steps_per_epoch = 1000;
  int sac_updates_per_epoch = 1000;
  int eval_episodes = 5;
  /// Eval return that counts as solved; enables the steps-to-threshold column.
  std::optional<double> threshold;
  bool stop_at_threshold = false;
  int checkpoint_every = 5;
  std::string output_dir = "runs";

  trainer::Schedule schedule;
  dmdmpc::PlannerConfig planner;
  /// Share of planner data per SAC batch; volume-proportional when unset.
  std::optional<double> mix_ratio;
  std::size_t env_buffer_capacity = 1000000;

  model::EnsembleConfig model;
  sac::SacConfig sac;

  envs::PendulumParams pendulum;
  envs::LegParams leg;
  envs::LqParams lq = envs::LqParams::defaults();

  regret::RegretConfig regret;
  std::vector<double> ablate_fractions = {0.01, 0.05, 0.10, 0.20, 0.50, 1.00};

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses YAML text. `overrides` are "dotted.key=value" strings applied on top
/// of the document before validation. Unknown keys are rejected.
RunConfig parse_config(std::string_view yaml_text,
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// Every field with its effective value, as YAML that parse_config accepts.
std::string to_yaml(const RunConfig& config);

std::unique_ptr<envs::Environment> make_env(const RunConfig& config);

/// Output root: $DEMORL_OUTPUT_ROOT joined with `output_dir` when the variable
/// is set and `output_dir` is relative, otherwise `output_dir` itself.
std::filesystem::path resolve_output_dir(const RunConfig& config);

inline constexpr const char* kOutputRootEnv = "DEMORL_OUTPUT_ROOT";

}  // namespace demorl::config

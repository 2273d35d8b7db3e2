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

#include "demorl/config/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace demorl::config {

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> columns = {
      "epoch",          "env_steps",         "eval_return",
      "eval_return_std", "eval_reward_per_step", "eval_tracking_error",
      "train_return",   "critic_loss",       "actor_loss",
      "temperature_loss", "temperature",     "sac_updates",
      "model_trained",  "model_train_loss",  "model_val_loss",
      "horizon",        "mpc_budget",        "mpc_transitions",
      "planner_calls",  "mean_elite_cost",   "dropped_trajectories",
      "shift_truncations", "planner_degenerate", "mix_ratio"};
  return columns;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string metrics_header() {
  std::string out;
  for (const auto& c : metrics_columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string metrics_row(const trainer::EpochReport& r) {
  const std::vector<std::string> cells = {
      std::to_string(r.epoch),
      std::to_string(r.env_steps),
      format_real(r.eval.mean_return),
      format_real(r.eval.std_return),
      format_real(r.eval.reward_per_step),
      format_real(r.eval.tracking_error),
      format_real(r.train_return),
      format_real(r.critic_loss),
      format_real(r.actor_loss),
      format_real(r.temperature_loss),
      format_real(r.temperature),
      std::to_string(r.sac_updates),
      r.model_trained ? "1" : "0",
      format_real(r.model_train_loss),
      format_real(r.model_val_loss),
      std::to_string(r.horizon),
      std::to_string(r.mpc_budget),
      std::to_string(r.mpc_transitions),
      std::to_string(r.planner_calls),
      format_real(r.mean_elite_cost),
      std::to_string(r.dropped_trajectories),
      std::to_string(r.shift_truncations),
      r.planner_degenerate ? "1" : "0",
      format_real(r.mix_ratio)};
  std::string out;
  for (const auto& c : cells) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

}  // namespace demorl::config

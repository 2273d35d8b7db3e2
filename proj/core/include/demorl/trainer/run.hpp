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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "demorl/config/run_config.hpp"
#include "demorl/trainer/trainer.hpp"

namespace demorl::trainer {

/// Process-wide graceful-stop request, checked between epochs. Safe to set
/// from a signal handler.
std::atomic<bool>& stop_flag();

struct RunOptions {
  /// Continue the run stored in this checkpoint instead of starting fresh.
  std::optional<std::filesystem::path> resume;
  bool write_checkpoints = true;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::filesystem::path directory;
  std::vector<EpochReport> reports;
  /// First epoch (0-based) whose eval return reached the threshold.
  std::optional<int> threshold_epoch;
  std::optional<std::uint64_t> threshold_env_steps;
  bool interrupted = false;
};

/// First report whose mean eval return is at least `threshold`.
std::optional<std::size_t> first_at_threshold(const std::vector<EpochReport>& reports,
                                              double threshold);

/// Runs (or resumes) one seed into `directory`: metrics.csv, events.jsonl,
/// config.resolved.yaml and checkpoints/.
SeedResult run_seed(const config::RunConfig& config, std::uint64_t seed,
                    const std::filesystem::path& directory, const RunOptions& options = {});

/// Validates the config, then runs every seed into
/// resolve_output_dir(config)/seed-<n>.
std::vector<SeedResult> run_training(const config::RunConfig& config,
                                     const RunOptions& options = {});

}  // namespace demorl::trainer

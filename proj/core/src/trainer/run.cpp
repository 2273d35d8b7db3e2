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

#include "demorl/trainer/run.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "demorl/config/metrics.hpp"
#include "demorl/errors.hpp"

namespace demorl::trainer {
namespace {

namespace fs = std::filesystem;

nlohmann::json real(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json epoch_event(const EpochReport& r) {
  return {{"event", "epoch"},
          {"epoch", r.epoch},
          {"env_steps", r.env_steps},
          {"eval_return", real(r.eval.mean_return)},
          {"eval_tracking_error", real(r.eval.tracking_error)},
          {"horizon", r.horizon},
          {"mpc_transitions", r.mpc_transitions},
          {"planner_degenerate", r.planner_degenerate},
          {"model_trained", r.model_trained},
          {"wall_time", r.wall_time}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

}  // namespace

std::atomic<bool>& stop_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

std::optional<std::size_t> first_at_threshold(const std::vector<EpochReport>& reports,
                                              double threshold) {
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports[i].eval.mean_return >= threshold) return i;
  }
  return std::nullopt;
}

SeedResult run_seed(const config::RunConfig& config, std::uint64_t seed,
                    const fs::path& directory, const RunOptions& options) {
  config.validate();
  fs::create_directories(directory / "checkpoints");
  write_text(directory / "config.resolved.yaml", config::to_yaml(config));

  SeedResult result;
  result.seed = seed;
  result.directory = directory;

  std::optional<Trainer> trainer;
  const fs::path metrics_path = directory / "metrics.csv";
  const bool resuming = options.resume.has_value();
  if (resuming) {
    trainer.emplace(Trainer::restore(config, Archive::load(*options.resume)));
    if (trainer->seed() != seed) {
      throw IntegrityError("checkpoint was written for seed " + std::to_string(trainer->seed()));
    }
  } else {
    trainer.emplace(config, seed);
  }
  const bool fresh_metrics = !resuming || !fs::exists(metrics_path) || fs::file_size(metrics_path) == 0;
  std::ofstream metrics(metrics_path, std::ios::binary | (fresh_metrics ? std::ios::trunc : std::ios::app));
  std::ofstream events(directory / "events.jsonl", resuming ? std::ios::app : std::ios::trunc);
  if (!metrics || !events) throw Error("cannot open outputs in " + directory.string());
  if (fresh_metrics) metrics << config::metrics_header() << '\n' << std::flush;

  events << nlohmann::json{{"event", resuming ? "resume" : "start"},
                           {"seed", seed},
                           {"env", config.env},
                           {"mode", std::string(config::to_string(config.mode))},
                           {"epoch", trainer->epoch()}}.dump()
         << '\n' << std::flush;

  const auto save = [&](const std::string& name) {
    if (!options.write_checkpoints) return;
    const Archive ar = trainer->checkpoint();
    ar.save(directory / "checkpoints" / name);
    ar.save(directory / "checkpoints" / "latest.ckpt");
    events << nlohmann::json{{"event", "checkpoint"}, {"epoch", trainer->epoch()}, {"file", name}}.dump()
           << '\n' << std::flush;
  };

  bool saved_last = true;
  while (trainer->epoch() < config.epochs) {
    if (stop_flag().load()) {
      result.interrupted = true;
      break;
    }
    const EpochReport r = trainer->run_epoch();
    saved_last = false;
    metrics << config::metrics_row(r) << '\n' << std::flush;
    events << epoch_event(r).dump() << '\n' << std::flush;
    if (r.planner_degenerate) {
      events << nlohmann::json{{"event", "planner_degenerate"}, {"epoch", r.epoch}}.dump() << '\n';
    }
    spdlog::info("seed {} epoch {}: eval return {:.2f}, {} planner transitions, {:.1f}s", seed,
                 r.epoch, r.eval.mean_return, r.mpc_transitions, r.wall_time);
    result.reports.push_back(r);

    if (config.threshold && !result.threshold_epoch && r.eval.mean_return >= *config.threshold) {
      result.threshold_epoch = r.epoch;
      result.threshold_env_steps = r.env_steps;
      events << nlohmann::json{{"event", "threshold_reached"}, {"epoch", r.epoch},
                               {"env_steps", r.env_steps}}.dump()
             << '\n' << std::flush;
    }
    if (config.checkpoint_every > 0 && trainer->epoch() % config.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch-%04d.ckpt", trainer->epoch());
      save(name);
      saved_last = true;
    }
    if (config.stop_at_threshold && result.threshold_epoch) break;
  }
  if (!saved_last) {
    char name[32];
    std::snprintf(name, sizeof name, "epoch-%04d.ckpt", trainer->epoch());
    save(name);
  }
  events << nlohmann::json{{"event", result.interrupted ? "interrupted" : "end"},
                           {"epoch", trainer->epoch()}}.dump()
         << '\n' << std::flush;
  return result;
}

std::vector<SeedResult> run_training(const config::RunConfig& config, const RunOptions& options) {
  config.validate();
  const fs::path root = config::resolve_output_dir(config);
  fs::create_directories(root);
  write_text(root / "config.resolved.yaml", config::to_yaml(config));
  std::vector<SeedResult> out;
  for (std::uint64_t seed : config.seeds) {
    out.push_back(run_seed(config, seed, root / ("seed-" + std::to_string(seed)), options));
    if (out.back().interrupted) break;
  }
  return out;
}

}  // namespace demorl::trainer

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

#include "demorl/trainer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "demorl/dmdmpc/planner.hpp"
#include "demorl/errors.hpp"
#include "demorl/trainer/schedule.hpp"

namespace demorl::trainer {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Rng named(std::uint64_t seed, std::string_view name) { return Rng(seed).stream(name); }

}  // namespace

EvalResult evaluate(const envs::Environment& env, const sac::SacAgent& agent, int episodes,
                    Rng rng) {
  if (episodes < 1) throw ParameterError("evaluate: episodes must be positive");
  EvalResult r;
  const int horizon = env.spec().horizon;
  double reward_sum = 0.0;
  double tracking_sum = 0.0;
  bool tracking = false;
  Rng unused(0);
  for (int e = 0; e < episodes; ++e) {
    Vector x = env.reset(rng);
    double ret = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const Vector u = sac::actor_sample(agent, x, unused, true).action;
      const envs::StepResult s = env.step(x, u);
      ret += s.reward;
      x = s.next_state;
      if (const auto err = env.tracking_error(x)) {
        tracking = true;
        tracking_sum += *err;
      }
      if (s.done) break;
    }
    reward_sum += ret;
    r.returns.push_back(ret);
  }
  const auto n = static_cast<double>(episodes);
  r.mean_return = reward_sum / n;
  double var = 0.0;
  for (double v : r.returns) var += (v - r.mean_return) * (v - r.mean_return);
  r.std_return = std::sqrt(var / n);
  r.reward_per_step = reward_sum / (n * horizon);
  r.tracking_error = tracking ? tracking_sum / (n * horizon) : kNaN;
  return r;
}

Trainer::Trainer(config::RunConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      seed_(seed),
      env_(config::make_env(config_)),
      env_rng_(named(seed, "env")),
      explore_rng_(named(seed, "explore")),
      agent_rng_(named(seed, "agent")),
      model_rng_(named(seed, "model")),
      planner_rng_(named(seed, "planner")),
      sampler_rng_(named(seed, "sampler")),
      agent_([&] {
        Rng init = named(seed, "agent-init");
        return sac::make_agent(env_->spec(), config_.sac, init);
      }()),
      model_([&] {
        Rng init = named(seed, "model-init");
        return model::EnsembleModel(env_->spec().state_dim, env_->spec().action_dim,
                                    config_.model, init);
      }()),
      env_buffer_(config_.env_buffer_capacity, env_->spec().state_dim, env_->spec().action_dim),
      mpc_buffer_(static_cast<std::size_t>(std::max(1, config_.schedule.mpc_batch_max)),
                  env_->spec().state_dim, env_->spec().action_dim) {
  config_.validate();
}

void Trainer::collect(EpochReport& report) {
  const int horizon = env_->spec().horizon;
  double finished = 0.0;
  int episodes = 0;
  for (int i = 0; i < config_.steps_per_epoch; ++i) {
    if (episode_step_ == 0) {
      episode_state_ = env_->reset(env_rng_);
      episode_return_ = 0.0;
    }
    const sac::ActionSample a = sac::actor_sample(agent_, episode_state_, explore_rng_, false);
    const envs::StepResult s = env_->step(episode_state_, a.action);
    env_buffer_.push({episode_state_, a.action, s.reward, s.next_state, s.done});
    ++env_steps_;
    episode_return_ += s.reward;
    episode_state_ = s.next_state;
    if (++episode_step_ >= horizon || s.done) {
      finished += episode_return_;
      ++episodes;
      episode_step_ = 0;
    }
  }
  report.train_return = episodes > 0 ? finished / episodes : kNaN;
}

void Trainer::plan_block(EpochReport& report) {
  mpc_buffer_.clear();
  const ScheduleValue sv = schedule_at(config_.schedule, epoch_);
  report.horizon = sv.horizon;
  report.mpc_budget = config_.mode == config::Mode::kDemorl ? sv.mpc_budget : 0;
  if (config_.mode != config::Mode::kDemorl) return;

  const model::TrainReport tr = model::train_ensemble(model_, env_buffer_, model_rng_);
  report.model_trained = tr.status == model::TrainStatus::kTrained;
  if (report.model_trained) {
    report.model_train_loss = tr.train_loss;
    double sum = 0.0;
    for (int k : model_.elites()) sum += tr.validation_losses[k];
    report.model_val_loss = sum / static_cast<double>(model_.elites().size());
  } else {
    report.model_train_loss = kNaN;
    report.model_val_loss = kNaN;
  }
  if (!model_.trained() || report.mpc_budget == 0) return;

  dmdmpc::PlannerConfig pc = config_.planner;
  pc.horizon = sv.horizon;
  pc.gamma = config_.sac.gamma;
  const dmdmpc::EnsembleDynamics dynamics(model_);
  const sac::SacAgent& agent = agent_;
  const dmdmpc::PolicyFn policy = [&agent](const Matrix& s) {
    return sac::actor_mean_batch(agent, s);
  };
  const dmdmpc::ValueFn value = [&agent](const Matrix& s, Rng& rng) {
    return sac::value_estimate_batch(agent, s, rng);
  };

  const auto budget = static_cast<std::size_t>(report.mpc_budget);
  double elite_cost_sum = 0.0;
  int empty_plans = 0;
  try {
    while (mpc_buffer_.size() < budget) {
      const Vector x0 = env_buffer_.at(planner_rng_.index(env_buffer_.size())).state;
      const dmdmpc::PlanResult pr =
          dmdmpc::plan(x0, policy, value, dynamics, pc, env_->spec(), planner_rng_);
      ++report.planner_calls;
      elite_cost_sum += pr.mean_elite_cost;
      report.dropped_trajectories += pr.dropped;
      report.shift_truncations += pr.shift_truncated ? 1 : 0;
      std::size_t pushed = 0;
      for (const envs::Transition& t : pr.transitions) {
        if (mpc_buffer_.size() >= budget) break;
        if (mpc_buffer_.push(t)) ++pushed;
      }
      empty_plans = pushed == 0 ? empty_plans + 1 : 0;
      if (empty_plans >= 100) {
        throw PlannerDegeneracyError("100 consecutive plans produced no usable transition");
      }
    }
  } catch (const PlannerDegeneracyError& e) {
    report.planner_degenerate = true;
    spdlog::warn("epoch {}: planner block skipped: {}", epoch_, e.what());
  }
  report.mpc_transitions = static_cast<int>(mpc_buffer_.size());
  report.mean_elite_cost =
      report.planner_calls > 0 ? elite_cost_sum / report.planner_calls : kNaN;
}

void Trainer::update_agent(EpochReport& report) {
  report.mix_ratio = config_.mix_ratio.value_or(buffers::mix_ratio(
      mpc_buffer_.size(), static_cast<std::size_t>(config_.steps_per_epoch)));
  if (mpc_buffer_.empty()) report.mix_ratio = 0.0;
  double critic = 0.0, actor = 0.0, temp = 0.0;
  const int g = config_.sac_updates_per_epoch;
  for (int i = 0; i < g; ++i) {
    const buffers::TransitionBatch batch = buffers::sample_mixed(
        env_buffer_, mpc_buffer_, config_.sac.batch_size, report.mix_ratio, sampler_rng_);
    const sac::SacLosses l = sac::sac_update(agent_, batch, agent_rng_);
    critic += l.critic;
    actor += l.actor;
    temp += l.temperature;
  }
  report.sac_updates = g;
  report.critic_loss = g > 0 ? critic / g : kNaN;
  report.actor_loss = g > 0 ? actor / g : kNaN;
  report.temperature_loss = g > 0 ? temp / g : kNaN;
  report.temperature = agent_.temperature();
}

EpochReport Trainer::run_epoch() {
  const auto start = std::chrono::steady_clock::now();
  EpochReport report;
  report.epoch = epoch_;
  collect(report);
  report.env_steps = env_steps_;
  plan_block(report);
  update_agent(report);
  report.eval = evaluate(*env_, agent_, config_.eval_episodes, named(seed_, "eval"));
  ++epoch_;
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Archive Trainer::checkpoint() const {
  Archive ar;
  ar.put_text("config", config::to_yaml(config_));
  const std::uint64_t counters[] = {seed_, static_cast<std::uint64_t>(epoch_), env_steps_,
                                    static_cast<std::uint64_t>(episode_step_)};
  ar.put_u64("trainer.counters", counters);
  const std::uint64_t rngs[] = {env_rng_.state(),   explore_rng_.state(), agent_rng_.state(),
                                model_rng_.state(), planner_rng_.state(), sampler_rng_.state()};
  ar.put_u64("trainer.rng", rngs);
  ar.put("trainer.episode_return", episode_return_);
  ar.put("trainer.episode_state",
         episode_state_.size() > 0 ? Matrix(episode_state_) : Matrix(0, 1));
  agent_.save(ar, "agent.");
  model_.save(ar, "model.");
  env_buffer_.save(ar, "d_env.");
  mpc_buffer_.save(ar, "d_mpc.");
  return ar;
}

Trainer Trainer::restore(config::RunConfig config, const Archive& ar) {
  const auto counters = ar.u64s("trainer.counters");
  const auto rngs = ar.u64s("trainer.rng");
  if (counters.size() != 4 || rngs.size() != 6) {
    throw IntegrityError("checkpoint trainer counters have the wrong length");
  }
  Trainer t(std::move(config), counters[0]);
  if (t.env_->spec().state_dim != static_cast<int>(ar.u64s("agent.dims").at(0))) {
    throw IntegrityError("checkpoint does not match the configured environment");
  }
  t.epoch_ = static_cast<int>(counters[1]);
  t.env_steps_ = counters[2];
  t.episode_step_ = static_cast<int>(counters[3]);
  t.env_rng_.set_state(rngs[0]);
  t.explore_rng_.set_state(rngs[1]);
  t.agent_rng_.set_state(rngs[2]);
  t.model_rng_.set_state(rngs[3]);
  t.planner_rng_.set_state(rngs[4]);
  t.sampler_rng_.set_state(rngs[5]);
  t.episode_return_ = ar.scalar("trainer.episode_return");
  t.episode_state_ = ar.matrix("trainer.episode_state");
  t.agent_ = sac::SacAgent::load(ar, "agent.", t.config_.sac);
  t.model_ = model::EnsembleModel::load(ar, "model.", t.config_.model);
  t.env_buffer_ = buffers::ReplayBuffer::load(ar, "d_env.");
  t.mpc_buffer_ = buffers::ReplayBuffer::load(ar, "d_mpc.");
  return t;
}

}  // namespace demorl::trainer

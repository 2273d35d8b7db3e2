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

#include <benchmark/benchmark.h>

#include "demorl/dmdmpc/planner.hpp"
#include "demorl/envs/pendulum.hpp"
#include "demorl/model/ensemble.hpp"
#include "demorl/numerics/mlp.hpp"
#include "demorl/sac/agent.hpp"

namespace {

using namespace demorl;

void BM_MlpForwardBackward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const int batch = static_cast<int>(state.range(1));
  Rng rng(0);
  const std::vector<int> sizes{8, width, width, 1};
  const auto net = make_mlp(sizes, Activation::kRelu, Activation::kLinear, rng);
  const Matrix x = standard_normal(rng, 8, batch);
  const Matrix g = Matrix::Ones(1, batch);
  for (auto _ : state) {
    const auto tape = mlp_forward_tape(net, x);
    auto back = mlp_backward(net, tape, g);
    benchmark::DoNotOptimize(back.param_grads.layers.front().weight.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForwardBackward)->Args({64, 256})->Args({256, 256});

buffers::TransitionBatch pendulum_batch(const envs::Pendulum& env, int count, Rng& rng) {
  buffers::TransitionBatch b;
  b.resize(3, 1, count);
  for (int j = 0; j < count; ++j) {
    const Vector x = env.reset(rng);
    const Vector u = Vector::Constant(1, rng.uniform(-2, 2));
    const auto r = env.step(x, u);
    b.states.col(j) = x;
    b.actions.col(j) = u;
    b.rewards[j] = r.reward;
    b.next_states.col(j) = r.next_state;
    b.dones[j] = 0;
  }
  return b;
}

void BM_SacUpdate(benchmark::State& state) {
  envs::Pendulum env;
  Rng rng(1);
  sac::SacConfig cfg;
  const int width = static_cast<int>(state.range(0));
  cfg.hidden = {width, width};
  auto agent = sac::make_agent(env.spec(), cfg, rng);
  const auto batch = pendulum_batch(env, cfg.batch_size, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sac::sac_update(agent, batch, rng));
}
BENCHMARK(BM_SacUpdate)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Plan(benchmark::State& state) {
  envs::Pendulum env;
  dmdmpc::EnvironmentDynamics model(env);
  Rng rng(2);
  sac::SacConfig scfg;
  scfg.hidden = {64, 64};
  const auto agent = sac::make_agent(env.spec(), scfg, rng);
  const dmdmpc::PolicyFn policy = [&](const Matrix& x) { return sac::actor_mean_batch(agent, x); };
  const dmdmpc::ValueFn value = [&](const Matrix& x, Rng& r) {
    return sac::value_estimate_batch(agent, x, r);
  };
  dmdmpc::PlannerConfig cfg;
  cfg.horizon = static_cast<int>(state.range(0));
  const Vector x0 = envs::Pendulum::make_state(2.0, 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dmdmpc::plan(x0, policy, value, model, cfg, env.spec(), rng));
  }
}
BENCHMARK(BM_Plan)->Arg(5)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_EnsembleTrain(benchmark::State& state) {
  envs::Pendulum env;
  Rng rng(3);
  model::EnsembleConfig cfg;
  cfg.epochs = 1;
  const auto data = pendulum_batch(env, static_cast<int>(state.range(0)), rng);
  for (auto _ : state) {
    state.PauseTiming();
    model::EnsembleModel m(3, 1, cfg, rng);
    state.ResumeTiming();
    benchmark::DoNotOptimize(model::train_ensemble(m, data, rng));
  }
}
BENCHMARK(BM_EnsembleTrain)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

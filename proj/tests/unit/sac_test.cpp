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

#include <cmath>

#include "demorl/errors.hpp"
#include "demorl/sac/agent.hpp"
#include "test_support.hpp"

namespace demorl::sac {
namespace {

using testing::rel_err;

envs::EnvSpec spec_2d() {
  envs::EnvSpec s;
  s.state_dim = 3;
  s.action_dim = 2;
  s.action_low = Vector(2);
  s.action_low << -2.0, 0.0;
  s.action_high = Vector(2);
  s.action_high << 2.0, 1.0;
  return s;
}

SacAgent mini_agent(std::uint64_t seed = 1) {
  SacConfig c;
  c.hidden = {8, 8};
  c.activation = Activation::kTanh;
  c.init_temperature = 0.3;
  Rng rng(seed);
  return make_agent(spec_2d(), c, rng);
}

buffers::TransitionBatch random_batch(const SacAgent& a, int count, Rng& rng) {
  buffers::TransitionBatch b;
  b.resize(a.state_dim, a.action_dim, count);
  b.states = testing::random_matrix(rng, a.state_dim, count);
  b.next_states = testing::random_matrix(rng, a.state_dim, count);
  for (int j = 0; j < count; ++j) {
    for (int i = 0; i < a.action_dim; ++i) {
      b.actions(i, j) = a.action_center[i] + a.action_half_range[i] * rng.uniform(-1, 1);
    }
    b.rewards[j] = rng.uniform(-1, 1);
    b.dones[j] = j % 4 == 0 ? 1.0 : 0.0;
  }
  return b;
}

TEST(Squash, DensityIntegratesToOneOverActionRange) {
  Vector mean(1), log_std(1), half(1);
  mean << 0.3;
  log_std << -0.5;
  half << 2.0;
  // Midpoint rule in action space, a = h tanh(z).
  const int n = 200000;
  double total = 0;
  for (int i = 0; i < n; ++i) {
    const double a = -2.0 + (i + 0.5) * 4.0 / n;
    Vector z(1);
    z << std::atanh(a / 2.0);
    total += std::exp(squashed_log_prob(z, mean, log_std, half)) * 4.0 / n;
  }
  EXPECT_NEAR(total, 1.0, 1e-4);
}

TEST(Squash, SampleLogProbMatchesClosedForm) {
  Rng rng(2);
  const Matrix mean = testing::random_matrix(rng, 2, 5);
  const Matrix log_std = testing::random_matrix(rng, 2, 5, 0.5);
  const Matrix eps = standard_normal(rng, 2, 5);
  Vector center(2), half(2);
  center << 0.0, 0.5;
  half << 2.0, 0.5;
  const auto s = squash_sample(mean, log_std, eps, center, half);
  for (int j = 0; j < 5; ++j) {
    const Vector z = mean.col(j).array() + log_std.col(j).array().exp() * eps.col(j).array();
    EXPECT_TRUE(s.pre_squash.col(j).isApprox(z));
    EXPECT_TRUE(s.normalized.col(j).isApprox(Vector(z.array().tanh())));
    EXPECT_TRUE(s.actions.col(j).isApprox(
        Vector(center.array() + half.array() * z.array().tanh())));
    EXPECT_NEAR(s.log_prob[j], squashed_log_prob(z, mean.col(j), log_std.col(j), half), 1e-10);
  }
}

TEST(Agent, ActionsStayWithinBounds) {
  auto a = mini_agent();
  Rng rng(3);
  const Matrix states = testing::random_matrix(rng, 3, 100, 5.0);
  const auto s = actor_sample_batch(a, states, rng);
  const Matrix det = actor_mean_batch(a, states);
  for (int j = 0; j < 100; ++j) {
    for (int i = 0; i < 2; ++i) {
      EXPECT_GE(s.actions(i, j), a.action_center[i] - a.action_half_range[i]);
      EXPECT_LE(s.actions(i, j), a.action_center[i] + a.action_half_range[i]);
      EXPECT_GE(det(i, j), a.action_center[i] - a.action_half_range[i]);
      EXPECT_LE(det(i, j), a.action_center[i] + a.action_half_range[i]);
    }
  }
  const auto one = actor_sample(a, states.col(0), rng, true);
  EXPECT_TRUE(one.action.isApprox(det.col(0)));
}

TEST(Agent, DefaultTargetEntropyIsMinusActionDim) {
  EXPECT_EQ(mini_agent().target_entropy, -2.0);
  EXPECT_NEAR(mini_agent().temperature(), 0.3, 1e-15);
}

TEST(Agent, TargetsStartAsCopies) {
  const auto a = mini_agent();
  EXPECT_EQ(flatten(a.target1), flatten(a.critic1));
  EXPECT_EQ(flatten(a.target2), flatten(a.critic2));
  EXPECT_NE(flatten(a.critic1), flatten(a.critic2));
}

TEST(CriticLoss, GradientMatchesFiniteDifferences) {
  const auto agent = mini_agent();
  Rng rng(4);
  const auto batch = random_batch(agent, 6, rng);
  const Matrix next_eps = standard_normal(rng, 2, 6);
  const auto g = critic_loss(agent, batch, next_eps);
  for (int which = 0; which < 2; ++which) {
    const auto analytic = flatten(which == 0 ? g.critic1 : g.critic2);
    const auto flat = flatten(which == 0 ? agent.critic1 : agent.critic2);
    std::function<double(std::vector<double>&)> f = [&](std::vector<double>& v) {
      SacAgent b = agent;
      unflatten(v, which == 0 ? b.critic1 : b.critic2);
      return critic_loss(b, batch, next_eps).loss;
    };
    for (std::size_t i = 0; i < flat.size(); i += 3) {
      ASSERT_LT(rel_err(testing::central_diff(f, flat, i), analytic[i]), 1e-4) << i;
    }
  }
}

TEST(CriticLoss, MatchesIndependentTargetComputation) {
  const auto agent = mini_agent();
  Rng rng(5);
  const auto batch = random_batch(agent, 4, rng);
  const Matrix next_eps = standard_normal(rng, 2, 4);
  double expected = 0;
  for (int j = 0; j < 4; ++j) {
    const Vector raw = mlp_forward(agent.actor, batch.next_states.col(j));
    const Vector mean = raw.head(2);
    const Vector log_std = raw.tail(2).cwiseMax(-20.0).cwiseMin(2.0);
    const Vector z = mean.array() + log_std.array().exp() * next_eps.col(j).array();
    const Vector t = z.array().tanh();
    Vector in(5), in_next(5);
    in << batch.states.col(j), (batch.actions.col(j) - agent.action_center).cwiseQuotient(
                                    agent.action_half_range);
    in_next << batch.next_states.col(j), t;
    const double q_next = std::min(mlp_forward(agent.target1, in_next)[0],
                                   mlp_forward(agent.target2, in_next)[0]);
    const double lp = squashed_log_prob(z, mean, log_std, agent.action_half_range);
    const double y = batch.rewards[j] +
                     0.99 * (1 - batch.dones[j]) * (q_next - agent.temperature() * lp);
    const double q1 = mlp_forward(agent.critic1, in)[0];
    const double q2 = mlp_forward(agent.critic2, in)[0];
    expected += 0.5 * ((q1 - y) * (q1 - y) + (q2 - y) * (q2 - y)) / 4.0;
  }
  EXPECT_NEAR(critic_loss(agent, batch, next_eps).loss, expected, 1e-10);
}

TEST(ActorLoss, GradientMatchesFiniteDifferences) {
  const auto agent = mini_agent();
  Rng rng(6);
  const Matrix states = testing::random_matrix(rng, 3, 5);
  const Matrix eps = standard_normal(rng, 2, 5);
  const auto g = actor_loss(agent, states, eps);
  const auto analytic = flatten(g.actor);
  const auto flat = flatten(agent.actor);
  std::function<double(std::vector<double>&)> f = [&](std::vector<double>& v) {
    SacAgent b = agent;
    unflatten(v, b.actor);
    return actor_loss(b, states, eps).loss;
  };
  for (std::size_t i = 0; i < flat.size(); i += 2) {
    ASSERT_LT(rel_err(testing::central_diff(f, flat, i), analytic[i]), 1e-4) << i;
  }
}

TEST(TemperatureLoss, GradientIsDerivativeInLogAlpha) {
  auto agent = mini_agent();
  const double mlp = -1.3;
  const auto g = temperature_loss(agent, mlp);
  EXPECT_NEAR(g.grad, -(mlp + agent.target_entropy), 1e-15);
  auto plus = agent, minus = agent;
  plus.log_temperature += 1e-6;
  minus.log_temperature -= 1e-6;
  const double fd =
      (temperature_loss(plus, mlp).loss - temperature_loss(minus, mlp).loss) / 2e-6;
  EXPECT_NEAR(fd, g.grad, 1e-6);
}

TEST(SacUpdate, TargetsArePolyakAveragedAfterCriticStep) {
  auto agent = mini_agent();
  agent.config.tau = 0.1;
  Rng rng(7);
  const auto batch = random_batch(agent, 16, rng);
  const auto t1 = flatten(agent.target1);
  sac_update(agent, batch, rng);
  const auto c1 = flatten(agent.critic1);
  const auto t1_after = flatten(agent.target1);
  for (std::size_t i = 0; i < t1.size(); ++i) {
    ASSERT_NEAR(t1_after[i], 0.1 * c1[i] + 0.9 * t1[i], 1e-14);
  }
}

TEST(SacUpdate, NonFiniteBatchLeavesAgentUnchanged) {
  auto agent = mini_agent();
  Rng rng(8);
  auto batch = random_batch(agent, 8, rng);
  batch.rewards[3] = std::nan("");
  const auto before = flatten(agent.actor);
  const auto c_before = flatten(agent.critic1);
  const double lt = agent.log_temperature;
  EXPECT_THROW(sac_update(agent, batch, rng), NumericError);
  EXPECT_EQ(flatten(agent.actor), before);
  EXPECT_EQ(flatten(agent.critic1), c_before);
  EXPECT_EQ(agent.log_temperature, lt);
}

TEST(SacUpdate, CriticConvergesToRewardWithoutBootstrap) {
  auto agent = mini_agent();
  agent.config.gamma = 0.0;
  agent.config.critic_lr = 3e-3;
  agent.critic1_opt.config.learning_rate = 3e-3;
  agent.critic2_opt.config.learning_rate = 3e-3;
  Rng rng(9);
  auto batch = random_batch(agent, 64, rng);
  batch.rewards.setConstant(0.7);
  for (int i = 0; i < 1500; ++i) sac_update(agent, batch, rng);
  const Vector q = min_q(agent, batch.states, batch.actions);
  EXPECT_NEAR(q.mean(), 0.7, 2e-2);
  EXPECT_LT((q.array() - 0.7).abs().maxCoeff(), 0.1);
}

TEST(SacUpdate, FixedTemperatureStaysFixed) {
  auto agent = mini_agent();
  agent.config.learn_temperature = false;
  Rng rng(10);
  const auto batch = random_batch(agent, 8, rng);
  const double lt = agent.log_temperature;
  sac_update(agent, batch, rng);
  EXPECT_EQ(agent.log_temperature, lt);
}

TEST(Agent, ArchiveRoundTrip) {
  auto agent = mini_agent();
  Rng rng(11);
  sac_update(agent, random_batch(agent, 8, rng), rng);
  Archive ar;
  agent.save(ar, "a.");
  const auto back = SacAgent::load(Archive::deserialize(ar.serialize()), "a.", agent.config);
  EXPECT_EQ(flatten(back.actor), flatten(agent.actor));
  EXPECT_EQ(flatten(back.target2), flatten(agent.target2));
  EXPECT_EQ(back.log_temperature, agent.log_temperature);
  EXPECT_EQ(back.actor_opt.step, agent.actor_opt.step);
  EXPECT_EQ(back.action_center, agent.action_center);
}

TEST(Agent, ValueEstimateIsSoftValue) {
  const auto agent = mini_agent();
  Rng rng(12);
  const Matrix states = testing::random_matrix(rng, 3, 4);
  const Matrix eps = standard_normal(rng, 2, 4);
  const Vector v = value_estimate_batch(agent, states, eps);
  const Matrix raw = mlp_forward_batch(agent.actor, states);
  Matrix mean, log_std;
  actor_head(agent, raw, mean, log_std);
  const auto s = squash_sample(mean, log_std, eps, agent.action_center, agent.action_half_range);
  const Vector expected = min_q(agent, states, s.actions) - agent.temperature() * s.log_prob;
  EXPECT_TRUE(v.isApprox(expected, 1e-12));
}

}  // namespace
}  // namespace demorl::sac

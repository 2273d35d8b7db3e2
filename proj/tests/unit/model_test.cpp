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

#include <algorithm>
#include <numeric>

#include "demorl/envs/lq.hpp"
#include "demorl/errors.hpp"
#include "demorl/model/ensemble.hpp"
#include "test_support.hpp"

namespace demorl::model {
namespace {

buffers::TransitionBatch lq_data(int count, Rng& rng) {
  envs::LinearQuadratic env;
  buffers::TransitionBatch b;
  b.resize(2, 1, count);
  for (int j = 0; j < count; ++j) {
    Vector x(2);
    x << rng.uniform(-1, 1), rng.uniform(-1, 1);
    const Vector u = Vector::Constant(1, rng.uniform(-1, 1));
    const auto r = env.step(x, u);
    b.states.col(j) = x;
    b.actions.col(j) = u;
    b.rewards[j] = r.reward;
    b.next_states.col(j) = r.next_state;
    b.dones[j] = 0.0;
  }
  return b;
}

EnsembleConfig small_config() {
  EnsembleConfig c;
  c.members = 3;
  c.hidden = {32, 32};
  c.activation = Activation::kTanh;
  c.epochs = 60;
  c.batch_size = 64;
  c.learning_rate = 3e-3;
  c.min_transitions = 100;
  return c;
}

std::vector<int> brute_force_members(const std::vector<double>& losses) {
  const int k = static_cast<int>(losses.size());
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  // Rank by (loss, index); keep the first ceil(K/2).
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (losses[idx[j]] < losses[idx[i]] ||
          (losses[idx[j]] == losses[idx[i]] && idx[j] < idx[i]))
        std::swap(idx[i], idx[j]);
  idx.resize((k + 1) / 2);
  std::sort(idx.begin(), idx.end());
  return idx;
}

TEST(SelectMembers, MatchesBruteForceWithTies) {
  Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const int k = 1 + static_cast<int>(rng.index(9));
    std::vector<double> losses(k);
    for (auto& l : losses) l = static_cast<double>(rng.index(4));  // many ties
    EXPECT_EQ(select_members(losses), brute_force_members(losses));
  }
}

TEST(SelectMembers, Examples) {
  EXPECT_EQ(select_members({0.5, 0.1, 0.3, 0.2, 0.9}), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(select_members({1.0}), (std::vector<int>{0}));
  EXPECT_EQ(select_members({1.0, 1.0}), (std::vector<int>{0}));
}

TEST(Normalizer, FitGivesZeroMeanUnitStd) {
  Rng rng(2);
  Matrix x = testing::random_matrix(rng, 3, 500, 4.0);
  x.row(1).array() += 7.0;
  x.row(2).setConstant(3.0);  // constant input stays unscaled
  const auto n = Normalizer::fit(x, 1e-6);
  const Matrix z = n.apply(x);
  EXPECT_NEAR(z.row(0).mean(), 0.0, 1e-12);
  EXPECT_NEAR(z.row(1).mean(), 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(z.row(0).squaredNorm() / 500), 1.0, 1e-12);
  EXPECT_EQ(n.std[2], 1.0);
  EXPECT_NEAR(z.row(2).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Ensemble, DefersBelowMinimumTransitions) {
  Rng rng(3);
  EnsembleModel model(2, 1, small_config(), rng);
  const auto data = lq_data(50, rng);
  const auto before = flatten(model.member(0));
  const auto report = train_ensemble(model, data, rng);
  EXPECT_EQ(report.status, TrainStatus::kDeferred);
  EXPECT_FALSE(model.trained());
  EXPECT_EQ(flatten(model.member(0)), before);
}

TEST(Ensemble, FitsLinearQuadraticDynamics) {
  Rng rng(4);
  EnsembleModel model(2, 1, small_config(), rng);
  const auto train = lq_data(1000, rng);
  const auto test = lq_data(300, rng);
  double baseline = 0;
  {
    Matrix y(3, test.size());
    y.topRows(2) = test.next_states - test.states;
    y.row(2) = test.rewards.transpose();
    baseline = (y.colwise() - y.rowwise().mean()).squaredNorm() / static_cast<double>(y.size());
  }
  const auto report = train_ensemble(model, train, rng);
  ASSERT_EQ(report.status, TrainStatus::kTrained);
  ASSERT_EQ(report.validation_losses.size(), 3u);
  EXPECT_EQ(model.elites().size(), 2u);
  for (int k = 0; k < model.size(); ++k) {
    EXPECT_LT(evaluate_mse(model, k, test), 0.05 * baseline) << "member " << k;
  }
}

TEST(Ensemble, PredictBatchMatchesSinglePredictions) {
  Rng rng(5);
  EnsembleModel model(2, 1, small_config(), rng);
  const auto data = lq_data(8, rng);
  const Matrix out = model.predict_batch(1, data.states, data.actions);
  ASSERT_EQ(out.rows(), 3);
  for (Eigen::Index j = 0; j < data.size(); ++j) {
    const auto p = model.predict(1, data.states.col(j), data.actions.col(j));
    EXPECT_TRUE(p.delta.isApprox(out.col(j).head(2)));
    EXPECT_NEAR(p.reward, out(2, j), 1e-12);
    EXPECT_TRUE(p.next_state.isApprox(data.states.col(j) + p.delta));
  }
}

TEST(Ensemble, TrainingIsDeterministicForASeed) {
  auto run = [] {
    Rng rng(6);
    auto cfg = small_config();
    cfg.epochs = 3;
    EnsembleModel model(2, 1, cfg, rng);
    const auto data = lq_data(300, rng);
    train_ensemble(model, data, rng);
    return flatten(model.member(2));
  };
  EXPECT_EQ(run(), run());
}

TEST(Ensemble, MaxUpdatesCapsSteps) {
  Rng rng(7);
  auto cfg = small_config();
  cfg.max_updates = 5;
  EnsembleModel model(2, 1, cfg, rng);
  const auto report = train_ensemble(model, lq_data(400, rng), rng);
  EXPECT_EQ(report.updates, 5);
}

TEST(Ensemble, GaussianNllModePredictsMean) {
  Rng rng(8);
  auto cfg = small_config();
  cfg.gaussian_nll = true;
  // the variance heads settle first, the means need a longer run
  cfg.epochs = 200;
  EnsembleModel model(2, 1, cfg, rng);
  EXPECT_EQ(model.member(0).output_dim(), 6);
  const auto train = lq_data(1000, rng);
  const auto report = train_ensemble(model, train, rng);
  ASSERT_EQ(report.status, TrainStatus::kTrained);
  const auto test = lq_data(200, rng);
  EnsembleModel untrained(2, 1, cfg, rng);
  EXPECT_LT(evaluate_mse(model, model.elites()[0], test),
            0.1 * evaluate_mse(untrained, 0, test));
}

TEST(Ensemble, ArchiveRoundTripPreservesPredictions) {
  Rng rng(9);
  auto cfg = small_config();
  cfg.epochs = 2;
  EnsembleModel model(2, 1, cfg, rng);
  const auto data = lq_data(200, rng);
  train_ensemble(model, data, rng);
  Archive ar;
  model.save(ar, "m.");
  const auto back = EnsembleModel::load(Archive::deserialize(ar.serialize()), "m.", cfg);
  EXPECT_EQ(back.elites(), model.elites());
  EXPECT_EQ(back.validation_losses(), model.validation_losses());
  for (int k = 0; k < model.size(); ++k) {
    EXPECT_EQ(back.predict_batch(k, data.states, data.actions),
              model.predict_batch(k, data.states, data.actions));
  }
}

TEST(EnsembleConfig, RejectsBadValues) {
  EnsembleConfig c;
  c.members = 0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.validation_fraction = 1.0;
  EXPECT_THROW(c.validate(), ParameterError);
}

}  // namespace
}  // namespace demorl::model

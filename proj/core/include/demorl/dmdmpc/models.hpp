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

#include <vector>

#include "demorl/envs/environment.hpp"
#include "demorl/model/ensemble.hpp"

namespace demorl::dmdmpc {

/// Batched one-step dynamics the planner rolls trajectories on. A model may
/// have several interchangeable members; each trajectory sticks to one.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  /// Members eligible for planning.
  virtual std::vector<int> planning_members() const = 0;
  /// Advances every column of `states` under `actions` with member k. Columns
  /// that become non-finite are left non-finite for the caller to discard.
  virtual void step(int member, const Matrix& states, const Matrix& actions, Matrix& next,
                    Vector& rewards) const = 0;
};

/// The learned ensemble restricted to its elite members.
class EnsembleDynamics final : public DynamicsModel {
 public:
  explicit EnsembleDynamics(const model::EnsembleModel& model) : model_(model) {}

  int state_dim() const override { return model_.state_dim(); }
  int action_dim() const override { return model_.action_dim(); }
  std::vector<int> planning_members() const override { return model_.elites(); }
  void step(int member, const Matrix& states, const Matrix& actions, Matrix& next,
            Vector& rewards) const override;

 private:
  const model::EnsembleModel& model_;
};

/// Ground-truth environment dynamics used as a single-member model.
class EnvironmentDynamics final : public DynamicsModel {
 public:
  explicit EnvironmentDynamics(const envs::Environment& env) : env_(env) {}

  int state_dim() const override { return env_.spec().state_dim; }
  int action_dim() const override { return env_.spec().action_dim; }
  std::vector<int> planning_members() const override { return {0}; }
  void step(int member, const Matrix& states, const Matrix& actions, Matrix& next,
            Vector& rewards) const override;

 private:
  const envs::Environment& env_;
};

}  // namespace demorl::dmdmpc

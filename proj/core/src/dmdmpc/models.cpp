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

#include "demorl/dmdmpc/models.hpp"

#include <limits>

#include "demorl/errors.hpp"

namespace demorl::dmdmpc {

void EnsembleDynamics::step(int member, const Matrix& states, const Matrix& actions,
                            Matrix& next, Vector& rewards) const {
  const Matrix out = model_.predict_batch(member, states, actions);
  const auto n = model_.state_dim();
  next = states + out.topRows(n);
  rewards = out.row(n).transpose();
}

void EnvironmentDynamics::step(int /*member*/, const Matrix& states, const Matrix& actions,
                               Matrix& next, Vector& rewards) const {
  next.resize(states.rows(), states.cols());
  rewards.resize(states.cols());
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    try {
      const envs::StepResult r = env_.step(states.col(c), actions.col(c));
      next.col(c) = r.next_state;
      rewards[c] = r.reward;
    } catch (const NumericError&) {
      next.col(c).setConstant(std::numeric_limits<double>::quiet_NaN());
      rewards[c] = std::numeric_limits<double>::quiet_NaN();
    }
  }
}

}  // namespace demorl::dmdmpc

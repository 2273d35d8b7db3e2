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

#include "demorl/envs/environment.hpp"

#include "demorl/errors.hpp"

namespace demorl::envs {

void EnvSpec::validate() const {
  if (state_dim < 1 || action_dim < 1) {
    throw ParameterError("EnvSpec: state and action dimensions must be >= 1");
  }
  if (action_low.size() != action_dim || action_high.size() != action_dim) {
    throw DimensionError("EnvSpec: action bound length must equal action_dim");
  }
  for (int i = 0; i < action_dim; ++i) {
    if (!(action_low[i] < action_high[i])) {
      throw ParameterError("EnvSpec: action low must be < high in every dimension");
    }
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("EnvSpec: gamma must lie in (0, 1)");
  if (horizon < 1) throw ParameterError("EnvSpec: horizon must be >= 1");
}

bool Transition::finite() const {
  return state.allFinite() && action.allFinite() && std::isfinite(reward) &&
         next_state.allFinite();
}

Vector clip_action(const EnvSpec& spec, const Vector& action) {
  if (action.size() != spec.action_dim) {
    throw DimensionError("action length does not match action_dim");
  }
  return action.cwiseMax(spec.action_low).cwiseMin(spec.action_high);
}

}  // namespace demorl::envs

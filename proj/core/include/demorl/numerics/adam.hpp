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

#include <cstdint>
#include <vector>

#include "demorl/numerics/mlp.hpp"

namespace demorl {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment optimizer state. Moments are stored as one flat block per
/// parameter tensor, in the order the tensors are visited by opt_step.
struct OptimState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;
};

OptimState make_optim_state(const MlpParams& params, const AdamConfig& config);
/// State for a single scalar parameter.
OptimState make_scalar_optim_state(const AdamConfig& config);

/// One bias-corrected Adam step in place. Throws NumericError (leaving both
/// params and state untouched) if any gradient entry is non-finite.
void opt_step(MlpParams& params, const MlpGrads& grads, OptimState& state);
void opt_step(double& value, double grad, OptimState& state);

}  // namespace demorl

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

#include "demorl/numerics/adam.hpp"

#include <cmath>

#include "demorl/errors.hpp"

namespace demorl {
namespace {

struct BiasCorrection {
  double c1;
  double c2;
};

BiasCorrection next_correction(const OptimState& s) {
  const double t = static_cast<double>(s.step + 1);
  return {1.0 - std::pow(s.config.beta1, t), 1.0 - std::pow(s.config.beta2, t)};
}

void update_block(double* p, const double* g, Vector& m, Vector& v,
                  const AdamConfig& cfg, BiasCorrection bc) {
  const Eigen::Index n = m.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc.c1;
    const double v_hat = v[i] / bc.c2;
    p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

}  // namespace

OptimState make_optim_state(const MlpParams& params, const AdamConfig& config) {
  OptimState s;
  s.config = config;
  for (const auto& l : params.layers) {
    s.first_moment.push_back(Vector::Zero(l.weight.size()));
    s.second_moment.push_back(Vector::Zero(l.weight.size()));
    s.first_moment.push_back(Vector::Zero(l.bias.size()));
    s.second_moment.push_back(Vector::Zero(l.bias.size()));
  }
  return s;
}

OptimState make_scalar_optim_state(const AdamConfig& config) {
  OptimState s;
  s.config = config;
  s.first_moment.push_back(Vector::Zero(1));
  s.second_moment.push_back(Vector::Zero(1));
  return s;
}

void opt_step(MlpParams& params, const MlpGrads& grads, OptimState& state) {
  const std::size_t n = params.layers.size();
  if (grads.layers.size() != n || state.first_moment.size() != 2 * n) {
    throw DimensionError("opt_step: parameter/gradient/state layer mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = params.layers[i];
    const auto& g = grads.layers[i];
    if (p.weight.rows() != g.weight.rows() || p.weight.cols() != g.weight.cols() ||
        p.bias.size() != g.bias.size() ||
        state.first_moment[2 * i].size() != p.weight.size() ||
        state.first_moment[2 * i + 1].size() != p.bias.size()) {
      throw DimensionError("opt_step: shape mismatch in layer " + std::to_string(i));
    }
  }
  if (!grads.all_finite()) throw NumericError("opt_step: non-finite gradient");

  const BiasCorrection bc = next_correction(state);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = params.layers[i];
    const auto& g = grads.layers[i];
    update_block(p.weight.data(), g.weight.data(), state.first_moment[2 * i],
                 state.second_moment[2 * i], state.config, bc);
    update_block(p.bias.data(), g.bias.data(), state.first_moment[2 * i + 1],
                 state.second_moment[2 * i + 1], state.config, bc);
  }
  ++state.step;
}

void opt_step(double& value, double grad, OptimState& state) {
  if (state.first_moment.size() != 1 || state.first_moment[0].size() != 1) {
    throw DimensionError("opt_step: state is not a scalar optimizer state");
  }
  if (!std::isfinite(grad)) throw NumericError("opt_step: non-finite gradient");
  const BiasCorrection bc = next_correction(state);
  update_block(&value, &grad, state.first_moment[0], state.second_moment[0],
               state.config, bc);
  ++state.step;
}

}  // namespace demorl

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

#include <span>
#include <string_view>
#include <vector>

#include "demorl/numerics/rng.hpp"
#include "demorl/numerics/types.hpp"

namespace demorl {

enum class Activation { kLinear, kTanh, kRelu };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

/// y = W x + b. `weight` is (out x in).
struct DenseLayer {
  Matrix weight;
  Vector bias;
};

/// Fixed-topology feedforward network.
struct MlpParams {
  std::vector<DenseLayer> layers;
  /// One tag per hidden layer (layers.size() - 1 entries).
  std::vector<Activation> hidden_activations;
  Activation output_activation = Activation::kLinear;

  Eigen::Index input_dim() const { return layers.front().weight.cols(); }
  Eigen::Index output_dim() const { return layers.back().weight.rows(); }
  std::size_t parameter_count() const;
};

/// Gradients share the layer structure of the parameters.
struct MlpGrads {
  std::vector<DenseLayer> layers;

  static MlpGrads zeros_like(const MlpParams& params);
  MlpGrads& operator+=(const MlpGrads& other);
  MlpGrads& operator*=(double s);
  bool all_finite() const;
};

/// Activations recorded by a forward pass; `values[0]` is the input batch and
/// `values[l]` the post-activation output of layer l.
struct MlpTape {
  std::vector<Matrix> values;
  const Matrix& output() const { return values.back(); }
};

/// Layer widths `sizes = {in, h1, ..., out}`. Weights and biases are drawn
/// uniformly from ±1/sqrt(fan_in).
MlpParams make_mlp(std::span<const int> sizes, Activation hidden,
                   Activation output, Rng& rng);

Vector mlp_forward(const MlpParams& params, const Vector& input);
/// Batched forward; `inputs` holds one sample per column.
Matrix mlp_forward_batch(const MlpParams& params, const Matrix& inputs);
MlpTape mlp_forward_tape(const MlpParams& params, const Matrix& inputs);

struct MlpBackward {
  MlpGrads param_grads;
  Matrix input_grad;
};

/// Reverse-mode gradient of sum(output ⊙ output_grad) w.r.t. parameters and
/// input, summed over the batch columns.
MlpBackward mlp_backward(const MlpParams& params, const MlpTape& tape,
                         const Matrix& output_grad);
MlpBackward mlp_backward(const MlpParams& params, const Vector& input,
                         const Vector& output_grad);
/// Input gradient only; skips the parameter outer products.
Matrix mlp_input_grad(const MlpParams& params, const MlpTape& tape,
                      const Matrix& output_grad);

/// Flattened parameter view helpers (layer order, weight column-major then
/// bias). Used by finite-difference checks and soft target updates.
std::vector<double> flatten(const MlpParams& params);
void unflatten(std::span<const double> flat, MlpParams& params);
std::vector<double> flatten(const MlpGrads& grads);

/// target <- tau * online + (1 - tau) * target, per parameter.
void soft_update(MlpParams& target, const MlpParams& online, double tau);

}  // namespace demorl

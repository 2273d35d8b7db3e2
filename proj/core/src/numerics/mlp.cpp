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

#include "demorl/numerics/mlp.hpp"

#include <cmath>
#include <string>

#include "demorl/errors.hpp"

namespace demorl {
namespace {

void apply_activation(Activation a, Matrix& m) {
  switch (a) {
    case Activation::kLinear:
      break;
    case Activation::kTanh:
      m = m.array().tanh();
      break;
    case Activation::kRelu:
      m = m.cwiseMax(0.0);
      break;
  }
}

// Multiplies `grad` in place by the activation derivative, expressed through
// the post-activation value.
void apply_derivative(Activation a, const Matrix& post, Matrix& grad) {
  switch (a) {
    case Activation::kLinear:
      break;
    case Activation::kTanh:
      grad.array() *= 1.0 - post.array().square();
      break;
    case Activation::kRelu:
      grad.array() *= (post.array() > 0.0).cast<double>();
      break;
  }
}

Activation activation_of(const MlpParams& p, std::size_t layer) {
  return layer + 1 == p.layers.size() ? p.output_activation
                                      : p.hidden_activations[layer];
}

void check_input(const MlpParams& params, Eigen::Index rows) {
  if (params.layers.empty()) throw DimensionError("mlp: network has no layers");
  if (rows != params.input_dim()) {
    throw DimensionError("mlp: input length " + std::to_string(rows) +
                         " does not match first layer width " +
                         std::to_string(params.input_dim()));
  }
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kLinear:
      return "linear";
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
  }
  return "linear";
}

Activation activation_from_string(std::string_view name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw ParameterError("unknown activation '" + std::string(name) + "'");
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& params) {
  MlpGrads g;
  g.layers.reserve(params.layers.size());
  for (const auto& l : params.layers) {
    g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()),
                        Vector::Zero(l.bias.size())});
  }
  return g;
}

MlpGrads& MlpGrads::operator+=(const MlpGrads& other) {
  if (other.layers.size() != layers.size()) {
    throw DimensionError("MlpGrads: layer count mismatch");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
  return *this;
}

MlpGrads& MlpGrads::operator*=(double s) {
  for (auto& l : layers) {
    l.weight *= s;
    l.bias *= s;
  }
  return *this;
}

bool MlpGrads::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

MlpParams make_mlp(std::span<const int> sizes, Activation hidden,
                   Activation output, Rng& rng) {
  if (sizes.size() < 2) throw DimensionError("make_mlp: need at least 2 sizes");
  MlpParams p;
  p.output_activation = output;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const int in = sizes[i];
    const int out = sizes[i + 1];
    if (in < 1 || out < 1) throw DimensionError("make_mlp: widths must be >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer{Matrix(out, in), Vector(out)};
    for (Eigen::Index c = 0; c < in; ++c) {
      for (Eigen::Index r = 0; r < out; ++r) {
        layer.weight(r, c) = rng.uniform(-bound, bound);
      }
    }
    for (Eigen::Index r = 0; r < out; ++r) layer.bias[r] = rng.uniform(-bound, bound);
    p.layers.push_back(std::move(layer));
    if (i + 2 < sizes.size()) p.hidden_activations.push_back(hidden);
  }
  return p;
}

Matrix mlp_forward_batch(const MlpParams& params, const Matrix& inputs) {
  check_input(params, inputs.rows());
  Matrix a = inputs;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Matrix z = layer.weight * a;
    z.colwise() += layer.bias;
    apply_activation(activation_of(params, l), z);
    a = std::move(z);
  }
  return a;
}

Vector mlp_forward(const MlpParams& params, const Vector& input) {
  return mlp_forward_batch(params, input);
}

MlpTape mlp_forward_tape(const MlpParams& params, const Matrix& inputs) {
  check_input(params, inputs.rows());
  MlpTape tape;
  tape.values.reserve(params.layers.size() + 1);
  tape.values.push_back(inputs);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Matrix z = layer.weight * tape.values.back();
    z.colwise() += layer.bias;
    apply_activation(activation_of(params, l), z);
    tape.values.push_back(std::move(z));
  }
  return tape;
}

MlpBackward mlp_backward(const MlpParams& params, const MlpTape& tape,
                         const Matrix& output_grad) {
  const std::size_t n_layers = params.layers.size();
  if (tape.values.size() != n_layers + 1) {
    throw DimensionError("mlp_backward: tape does not match network depth");
  }
  if (output_grad.rows() != params.output_dim() ||
      output_grad.cols() != tape.output().cols()) {
    throw DimensionError("mlp_backward: output_grad shape mismatch");
  }
  MlpBackward out;
  out.param_grads.layers.resize(n_layers);
  Matrix delta = output_grad;
  for (std::size_t l = n_layers; l-- > 0;) {
    apply_derivative(activation_of(params, l), tape.values[l + 1], delta);
    auto& g = out.param_grads.layers[l];
    g.weight.noalias() = delta * tape.values[l].transpose();
    g.bias = delta.rowwise().sum();
    Matrix prev = params.layers[l].weight.transpose() * delta;
    delta = std::move(prev);
  }
  out.input_grad = std::move(delta);
  return out;
}

MlpBackward mlp_backward(const MlpParams& params, const Vector& input,
                         const Vector& output_grad) {
  return mlp_backward(params, mlp_forward_tape(params, input), output_grad);
}

Matrix mlp_input_grad(const MlpParams& params, const MlpTape& tape,
                      const Matrix& output_grad) {
  const std::size_t n_layers = params.layers.size();
  if (tape.values.size() != n_layers + 1 ||
      output_grad.rows() != params.output_dim()) {
    throw DimensionError("mlp_input_grad: shape mismatch");
  }
  Matrix delta = output_grad;
  for (std::size_t l = n_layers; l-- > 0;) {
    apply_derivative(activation_of(params, l), tape.values[l + 1], delta);
    Matrix prev = params.layers[l].weight.transpose() * delta;
    delta = std::move(prev);
  }
  return delta;
}

std::vector<double> flatten(const MlpParams& params) {
  std::vector<double> flat;
  flat.reserve(params.parameter_count());
  for (const auto& l : params.layers) {
    flat.insert(flat.end(), l.weight.data(), l.weight.data() + l.weight.size());
    flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return flat;
}

std::vector<double> flatten(const MlpGrads& grads) {
  std::vector<double> flat;
  for (const auto& l : grads.layers) {
    flat.insert(flat.end(), l.weight.data(), l.weight.data() + l.weight.size());
    flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return flat;
}

void unflatten(std::span<const double> flat, MlpParams& params) {
  if (flat.size() != params.parameter_count()) {
    throw DimensionError("unflatten: size mismatch");
  }
  std::size_t k = 0;
  for (auto& l : params.layers) {
    std::copy_n(flat.data() + k, l.weight.size(), l.weight.data());
    k += l.weight.size();
    std::copy_n(flat.data() + k, l.bias.size(), l.bias.data());
    k += l.bias.size();
  }
}

void soft_update(MlpParams& target, const MlpParams& online, double tau) {
  if (target.layers.size() != online.layers.size()) {
    throw DimensionError("soft_update: layer count mismatch");
  }
  for (std::size_t i = 0; i < target.layers.size(); ++i) {
    auto& t = target.layers[i];
    const auto& o = online.layers[i];
    if (t.weight.rows() != o.weight.rows() || t.weight.cols() != o.weight.cols()) {
      throw DimensionError("soft_update: layer shape mismatch");
    }
    t.weight = tau * o.weight + (1.0 - tau) * t.weight;
    t.bias = tau * o.bias + (1.0 - tau) * t.bias;
  }
}

}  // namespace demorl

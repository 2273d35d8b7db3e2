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

#include "demorl/numerics/rng.hpp"

#include <cmath>
#include <numbers>

#include "demorl/errors.hpp"

namespace demorl {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// FNV-1a, used only to turn stream names into keys.
std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t Rng::next_u64() {
  state_ += kGolden;
  return mix(state_);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n) {
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<std::size_t>(wide >> 64);
}

Rng Rng::stream(std::string_view name) const {
  return stream(hash_name(name));
}

Rng Rng::stream(std::uint64_t key) const {
  return Rng(mix(state_ ^ mix(key + kGolden)));
}

Vector gaussian_sample(Rng& rng, const Vector& mean, const Vector& diag_std) {
  if (mean.size() != diag_std.size()) {
    throw DimensionError("gaussian_sample: mean and std lengths differ");
  }
  for (Eigen::Index i = 0; i < diag_std.size(); ++i) {
    if (!(diag_std[i] > 0.0)) {
      throw ParameterError("gaussian_sample: std entries must be positive");
    }
  }
  Vector out(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    out[i] = mean[i] + diag_std[i] * rng.normal();
  }
  return out;
}

Matrix standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = rng.normal();
  }
  return z;
}

}  // namespace demorl

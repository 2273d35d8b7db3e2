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

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>

#include "demorl/numerics/types.hpp"

namespace demorl {

/// Counter-based generator (SplitMix64). The whole state is one 64-bit
/// counter, so streams are trivially checkpointed and split.
///
/// Satisfies UniformRandomBitGenerator so it can drive std::shuffle.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal draw (Box-Muller, no cached second variate).
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Independent child stream keyed by name; does not advance this stream.
  Rng stream(std::string_view name) const;
  Rng stream(std::uint64_t key) const;

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_;
};

/// mean + std ⊙ z with z ~ N(0, I). Throws ParameterError unless every
/// std entry is strictly positive.
Vector gaussian_sample(Rng& rng, const Vector& mean, const Vector& diag_std);

/// Fills a matrix with independent standard normals, column by column.
Matrix standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols);

}  // namespace demorl

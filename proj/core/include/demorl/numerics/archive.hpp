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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "demorl/numerics/adam.hpp"
#include "demorl/numerics/mlp.hpp"
#include "demorl/numerics/types.hpp"

namespace demorl {

/// Flat, named, typed arrays with a versioned header and a trailing checksum.
///
/// On-disk layout (little endian):
///   magic "DMRLARC1" | u32 version | u64 entry count
///   per entry: u32 name length | name | u8 dtype | u32 rank | u64 dims[rank]
///              | raw payload
///   u64 FNV-1a checksum of every preceding byte
///
/// Matrices are stored row-major regardless of the in-memory layout.
class Archive {
 public:
  static constexpr std::uint32_t kVersion = 1;

  enum class DType : std::uint8_t { kF64 = 0, kU64 = 1, kBytes = 2 };

  struct Entry {
    DType dtype = DType::kF64;
    std::vector<std::uint64_t> shape;
    std::vector<double> f64;
    std::vector<std::uint64_t> u64;
    std::string bytes;
  };

  void put(const std::string& name, std::vector<std::uint64_t> shape,
           std::span<const double> values);
  void put(const std::string& name, const Matrix& m);
  void put(const std::string& name, double value);
  void put_u64(const std::string& name, std::span<const std::uint64_t> values);
  void put_u64(const std::string& name, std::uint64_t value);
  void put_text(const std::string& name, std::string_view text);

  bool contains(const std::string& name) const;
  const Entry& get(const std::string& name) const;
  Matrix matrix(const std::string& name) const;
  Vector vector(const std::string& name) const;
  double scalar(const std::string& name) const;
  std::vector<std::uint64_t> u64s(const std::string& name) const;
  std::uint64_t u64(const std::string& name) const;
  std::string text(const std::string& name) const;

  std::vector<std::string> names() const;

  std::string serialize() const;
  static Archive deserialize(std::string_view data);

  void save(const std::filesystem::path& path) const;
  /// Throws IntegrityError on bad magic, unknown version, truncation or
  /// checksum mismatch.
  static Archive load(const std::filesystem::path& path);

 private:
  std::map<std::string, Entry> entries_;
};

void put_mlp(Archive& ar, const std::string& prefix, const MlpParams& params);
MlpParams get_mlp(const Archive& ar, const std::string& prefix);
void put_optim(Archive& ar, const std::string& prefix, const OptimState& state);
OptimState get_optim(const Archive& ar, const std::string& prefix);

}  // namespace demorl

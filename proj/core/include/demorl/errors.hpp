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

#include <stdexcept>
#include <string>
#include <utility>

namespace demorl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not chain (network layers, matrix products, buffers).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity reached a place that requires finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Too many planner rollouts were discarded to form a meaningful update.
class PlannerDegeneracyError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint or archive failed its magic, version or checksum test.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration. `field` is the dotted key path, `line` is
/// 1-based when known and 0 otherwise.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, int line, const std::string& message)
      : Error(Format(field, line, message)),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  static std::string Format(const std::string& field, int line,
                            const std::string& message) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "'" + field + "': ";
    return out + message;
  }

  std::string field_;
  int line_ = 0;
};

}  // namespace demorl

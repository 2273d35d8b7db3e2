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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "demorl/envs/environment.hpp"

namespace demorl::envs {

/// Names accepted by make_environment: "pendulum", "leg", "lq".
std::vector<std::string> environment_names();

/// Environment with default physical constants. Throws ParameterError for an
/// unknown name.
std::unique_ptr<Environment> make_environment(std::string_view name);

}  // namespace demorl::envs

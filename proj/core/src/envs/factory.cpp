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

#include "demorl/envs/factory.hpp"

#include "demorl/envs/leg.hpp"
#include "demorl/envs/lq.hpp"
#include "demorl/envs/pendulum.hpp"
#include "demorl/errors.hpp"

namespace demorl::envs {

std::vector<std::string> environment_names() { return {"pendulum", "leg", "lq"}; }

std::unique_ptr<Environment> make_environment(std::string_view name) {
  if (name == "pendulum") return std::make_unique<Pendulum>();
  if (name == "leg") return std::make_unique<Leg>();
  if (name == "lq") return std::make_unique<LinearQuadratic>();
  throw ParameterError("unknown environment '" + std::string(name) + "'");
}

}  // namespace demorl::envs

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

#include "demorl/trainer/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "demorl/errors.hpp"

namespace demorl::trainer {

void Schedule::validate() const {
  if (horizon_min < 1 || horizon_max < horizon_min) {
    throw ParameterError("schedule needs 1 <= horizon_min <= horizon_max");
  }
  if (mpc_batch_max < 0) throw ParameterError("mpc_batch_max must be non-negative");
  if (ramp_epochs < 0) throw ParameterError("ramp_epochs must be non-negative");
}

ScheduleValue schedule_at(const Schedule& s, int epoch) {
  if (epoch < 0) throw ParameterError("schedule_at: epoch must be non-negative");
  const double frac =
      s.ramp_epochs > 0 ? std::min(1.0, static_cast<double>(epoch) / s.ramp_epochs) : 1.0;
  ScheduleValue v;
  v.horizon = static_cast<int>(std::lround(s.horizon_min + frac * (s.horizon_max - s.horizon_min)));
  v.mpc_budget = static_cast<int>(std::lround(frac * s.mpc_batch_max));
  return v;
}

}  // namespace demorl::trainer

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

namespace demorl::trainer {

/// Linear ramps for the planning horizon and the per-epoch planner data
/// budget, flat after `ramp_epochs`.
struct Schedule {
  int horizon_min = 5;
  int horizon_max = 15;
  int mpc_batch_max = 10000;
  int ramp_epochs = 20;

  void validate() const;
};

struct ScheduleValue {
  int horizon = 1;
  int mpc_budget = 0;  // planner transitions allowed this epoch
};

ScheduleValue schedule_at(const Schedule& schedule, int epoch);

}  // namespace demorl::trainer

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

#include <string>
#include <vector>

#include "demorl/trainer/trainer.hpp"

namespace demorl::config {

/// Ordered metrics.csv column names. Append-only: existing columns keep their
/// position across releases.
const std::vector<std::string>& metrics_columns();

std::string metrics_header();
/// One CSV line (no trailing newline). Reals use 17 significant digits so the
/// file is a bitwise function of the run.
std::string metrics_row(const trainer::EpochReport& report);

std::string format_real(double v);

}  // namespace demorl::config

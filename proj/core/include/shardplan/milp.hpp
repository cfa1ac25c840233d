// Copyright 2026 The shardplan authors
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

#include <limits>

#include "shardplan/plan.hpp"

namespace shardplan {

/// Assembles the optimization instance from aligned stats and specs.
/// step_count is the number of uniform ICDF steps (default 100); smaller
/// values coarsen the split grid and shrink the search space.
MilpInstance build_instance(const std::vector<FeatureStats>& stats,
                            const std::vector<TableSpec>& specs,
                            const SystemSpec& system,
                            const Ablation& ablation = {},
                            uint32_t step_count = 100);

/// Decision-variable count of the model: M*J assignment binaries,
/// (step_count+1)*J step binaries, plus derived continuous variables
/// (mem_j, pct_j, c_m, C).
uint64_t variable_count(const MilpInstance& instance);

/// Minimizes the maximum per-GPU coverage-weighted cost by branch and bound:
/// GPU assignment first, then the per-GPU step selection (a multiple-choice
/// knapsack over the ICDF grid, bounded by its continuous relaxation).
///
/// Small instances (J <= 10, M <= 3, step_count <= 12) are solved to proven
/// optimality. Larger instances run heuristics plus budgeted search and
/// return the best incumbent with a valid lower bound. The time limit is
/// enforced through a deterministic node budget derived from it, so a run is
/// reproducible regardless of machine speed.
///
/// Among objective-optimal plans the solver prefers lower total cost (which
/// pins every table to the highest-pct step of its row count), then the
/// lexicographically smallest (assignment, step) vector.
ShardingPlan solve(const MilpInstance& instance,
                   double time_limit_seconds =
                       std::numeric_limits<double>::infinity());

}  // namespace shardplan

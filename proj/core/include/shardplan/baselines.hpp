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

#include "shardplan/plan.hpp"

namespace shardplan {

/// The production fixed cost functions baselines rank tables by. They never
/// look at the access CDF; that is the contrast with the fine-grained
/// planner.
enum class CostKind { kSize, kLookup, kSizeAndLookup };

const char* to_string(CostKind kind);
CostKind cost_kind_from_string(const std::string& s);

/// Size = hash_size * dim; Lookup = avg_pool * dim;
/// SizeAndLookup = avg_pool * dim * log10(hash_size). For the degenerate
/// hash_size < 10 the log factor clamps to 0 and a warning goes to stderr.
/// `stats` may be null only for kSize.
double table_fixed_cost(const TableSpec& spec, const FeatureStats* stats,
                        CostKind kind);

/// Whole-table greedy placement: tables in descending cost order, the first
/// M one per GPU, then each onto the lowest-cost-sum GPU whose fast tier
/// still fits it; from the first table that fits nowhere onward, tables go
/// to the slow tier of the GPU with the lowest running total (slow-tier
/// entries weighted by bw_hbm/bw_uvm). Ties break by ascending table id and
/// ascending gpu id. `stats` are used only to report the plan's modeled
/// per-GPU costs.
ShardingPlan greedy_shard(const std::vector<double>& costs,
                          const std::vector<TableSpec>& specs,
                          const std::vector<FeatureStats>& stats,
                          const SystemSpec& system);

/// Whole-table multiway largest-differencing (Karmarkar-Karp with M-tuples):
/// repeatedly merges the two partial partitions with the largest spread,
/// pairing largest sums against smallest. Partitions map to GPUs in
/// descending-sum order; within a GPU, tables fill the fast tier in
/// descending cost order and overflow to that GPU's slow tier.
ShardingPlan ldm_shard(const std::vector<double>& costs,
                       const std::vector<TableSpec>& specs,
                       const std::vector<FeatureStats>& stats,
                       const SystemSpec& system);

}  // namespace shardplan

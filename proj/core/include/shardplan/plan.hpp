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

#include <optional>
#include <string>
#include <vector>

#include "shardplan/profiler.hpp"
#include "shardplan/types.hpp"

namespace shardplan {

/// Per-table placement: the assigned GPU and the fast-tier row split.
struct PlanEntry {
  uint32_t table_id = 0;
  uint32_t gpu = 0;
  uint32_t step = 0;       // chosen ICDF step; pct == step / step_count
  uint64_t hbm_rows = 0;   // rows in the fast tier
  double pct = 0.0;        // access fraction served from the fast tier
  uint64_t mem_bytes = 0;  // fast-tier bytes = hbm_rows * dim * elem_bytes
};

struct ShardingPlan {
  std::string strategy;  // "milp", "greedy-size", "ldm-lookup", ...
  uint32_t step_count = 0;
  std::vector<PlanEntry> entries;    // ordered by table_id
  std::vector<double> gpu_cost;      // c_m, coverage-weighted
  double objective = 0.0;            // C = max_m c_m
  double lower_bound = 0.0;
  bool proved_optimal = false;
};

/// The optimization input: aligned (spec, stats) pairs plus the system.
struct MilpTable {
  TableSpec spec;
  FeatureStats stats;
};

struct MilpInstance {
  std::vector<MilpTable> tables;
  SystemSpec system;
  Ablation ablation;
  uint32_t step_count = 100;
};

/// Forward-pass lookup cost of one table at fast-tier hit fraction `pct`
/// (seconds): avg_pool * dim * bytes * B * (pct/bw_hbm + (1-pct)/bw_uvm).
/// Ablation replaces avg_pool by 1. Coverage weighting happens at the
/// per-GPU aggregation, not here.
double table_cost(const TableSpec& spec, const FeatureStats& stats, double pct,
                  const SystemSpec& system, const Ablation& ablation);

/// Recomputes per-GPU costs and the objective from the plan entries using
/// the instance's cost model, overwriting plan.gpu_cost and plan.objective.
void recompute_plan_costs(ShardingPlan& plan, const MilpInstance& instance);

/// Independent feasibility validator. Returns a violation description, or
/// nullopt when the plan satisfies: one GPU per table; per-GPU fast-tier and
/// slow-tier capacities; entry arithmetic (mem_bytes vs hbm_rows); and, for
/// plans whose step grid is the instance's (strategy "milp"), step/pct/rows
/// consistency with the ICDF. Also checks that objective == max gpu_cost.
std::optional<std::string> check_plan(const ShardingPlan& plan,
                                      const MilpInstance& instance);

/// Throwing wrapper over check_plan.
void validate_plan(const ShardingPlan& plan, const MilpInstance& instance);

/// Fast-tier rows for step i of a table's 101-entry percent ICDF when the
/// plan uses `step_count` uniform steps: the fewest rows covering at least
/// i/step_count of accesses.
uint64_t rows_at_step(const std::vector<uint64_t>& icdf_steps, uint32_t step,
                      uint32_t step_count);

// Plan file: structured text (see docs/formats.md).
void write_plan(const ShardingPlan& plan, const std::string& path,
                const std::vector<std::string>& comments = {});
ShardingPlan read_plan(const std::string& path);

}  // namespace shardplan

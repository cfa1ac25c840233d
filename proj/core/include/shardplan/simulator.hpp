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

#include "shardplan/remap.hpp"
#include "shardplan/workload.hpp"

namespace shardplan {

/// Trace-replay results: per-GPU tier access counts and modeled iteration
/// cost, averaged over full batches (a trailing partial batch is dropped).
struct SimReport {
  struct Gpu {
    double hbm_accesses = 0.0;  // per iteration
    double uvm_accesses = 0.0;  // per iteration
    double est_iter_cost = 0.0; // seconds
  };
  std::vector<Gpu> gpus;
  uint64_t batches = 0;
  uint64_t total_accesses = 0;  // over the simulated batches
  double min_cost = 0.0, max_cost = 0.0, mean_cost = 0.0, stddev_cost = 0.0;
  double uvm_access_fraction = 0.0;

  // Per-table fast-tier hit fraction, keyed like the trace table order;
  // NaN for tables with no accesses.
  std::vector<double> table_fast_fraction;
};

/// Replays the trace against a plan and its remap tables: every hashed id
/// routes through translate() to a tier on the table's assigned GPU. The
/// cost model is bandwidth-linear, the row-weighted analogue of the
/// planner's per-table cost.
SimReport simulate(const Trace& trace, const ShardingPlan& plan,
                   const std::vector<RemapTable>& remaps,
                   const SystemSpec& system, uint64_t batch_size);

/// Row-overlap disparity between two plans covering the same tables, under
/// the shared frequency ranking (both plans' fast tiers are rank prefixes):
///   uvm_to_hbm: fraction of rows plan_b puts in the slow tier that plan_a
///               puts in the fast tier;
///   hbm_to_uvm: fraction of rows plan_b puts in the fast tier that plan_a
///               puts in the slow tier.
struct PlanOverlap {
  double uvm_to_hbm = 0.0;
  double hbm_to_uvm = 0.0;
};

PlanOverlap compare_plans(const ShardingPlan& plan_a, const ShardingPlan& plan_b,
                          const std::vector<TableSpec>& specs);

/// End-to-end speedup when a fraction p of runtime is accelerated by s.
double amdahl_speedup(double p, double s);

// Report emitters: an aligned text table and a CSV with stable columns
// (gpu,hbm_accesses,uvm_accesses,est_iter_cost_s).
std::string format_report(const SimReport& report, const std::string& label);
void write_report_csv(const SimReport& report, const std::string& path,
                      const std::vector<std::string>& comments = {});

}  // namespace shardplan

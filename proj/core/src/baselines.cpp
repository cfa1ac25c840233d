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

#include "shardplan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <queue>

#include "shardplan/milp.hpp"

namespace shardplan {

const char* to_string(CostKind kind) {
  switch (kind) {
    case CostKind::kSize: return "size";
    case CostKind::kLookup: return "lookup";
    case CostKind::kSizeAndLookup: return "size-lookup";
  }
  return "?";
}

CostKind cost_kind_from_string(const std::string& s) {
  if (s == "size") return CostKind::kSize;
  if (s == "lookup") return CostKind::kLookup;
  if (s == "size-lookup" || s == "size-and-lookup")
    return CostKind::kSizeAndLookup;
  throw InvalidArgument("unknown cost function: " + s);
}

double table_fixed_cost(const TableSpec& spec, const FeatureStats* stats,
                        CostKind kind) {
  switch (kind) {
    case CostKind::kSize:
      return static_cast<double>(spec.hash_size) * spec.dim;
    case CostKind::kLookup:
      if (!stats)
        throw InvalidArgument("lookup cost needs feature stats");
      return stats->avg_pooling * spec.dim;
    case CostKind::kSizeAndLookup: {
      if (!stats)
        throw InvalidArgument("size-lookup cost needs feature stats");
      double log_term = std::log10(static_cast<double>(spec.hash_size));
      if (log_term < 0.0) {
        std::fprintf(stderr,
                     "warning: table %u hash_size %llu < 10, clamping "
                     "log10 factor to 0\n",
                     spec.table_id, (unsigned long long)spec.hash_size);
        log_term = 0.0;
      }
      return stats->avg_pooling * spec.dim * log_term;
    }
  }
  return 0.0;
}

namespace {

struct Ranked {
  double cost;
  uint32_t index;  // into specs
};

// Descending cost, ties by ascending table id.
std::vector<Ranked> rank_tables(const std::vector<double>& costs,
                                const std::vector<TableSpec>& specs) {
  if (costs.size() != specs.size())
    throw InvalidArgument("baseline: costs and specs differ in length");
  if (specs.empty()) throw InvalidArgument("baseline: no tables");
  for (double c : costs)
    if (!(c >= 0.0) || !std::isfinite(c))
      throw InvalidArgument("baseline: costs must be finite and >= 0");
  std::vector<Ranked> order(specs.size());
  for (uint32_t i = 0; i < specs.size(); ++i) order[i] = {costs[i], i};
  std::sort(order.begin(), order.end(), [&](const Ranked& a, const Ranked& b) {
    if (a.cost != b.cost) return a.cost > b.cost;
    return specs[a.index].table_id < specs[b.index].table_id;
  });
  return order;
}

ShardingPlan assemble(const std::vector<TableSpec>& specs,
                      const std::vector<FeatureStats>& stats,
                      const SystemSpec& system,
                      const std::vector<uint32_t>& gpu_of,
                      const std::vector<bool>& in_hbm,
                      const std::string& strategy) {
  ShardingPlan plan;
  plan.strategy = strategy;
  plan.step_count = 1;  // whole-table grid: pct is 0 or 1
  plan.entries.reserve(specs.size());
  for (size_t j = 0; j < specs.size(); ++j) {
    PlanEntry e;
    e.table_id = specs[j].table_id;
    e.gpu = gpu_of[j];
    e.step = in_hbm[j] ? 1 : 0;
    e.pct = in_hbm[j] ? 1.0 : 0.0;
    e.hbm_rows = in_hbm[j] ? specs[j].hash_size : 0;
    e.mem_bytes = e.hbm_rows * specs[j].dim * specs[j].elem_bytes;
    plan.entries.push_back(e);
  }
  MilpInstance inst = build_instance(stats, specs, system);
  recompute_plan_costs(plan, inst);
  plan.lower_bound = 0.0;
  plan.proved_optimal = false;
  return plan;
}

void check_aggregate_capacity(const std::vector<TableSpec>& specs,
                              const SystemSpec& system) {
  uint64_t total = 0;
  for (const auto& s : specs) total += s.bytes();
  uint64_t aggregate = uint64_t{system.num_gpus} *
                       (system.cap_hbm_bytes + system.cap_dram_bytes);
  if (total > aggregate)
    throw InfeasibleError(strfmt(
        "total table bytes %llu exceed aggregate capacity %llu",
        (unsigned long long)total, (unsigned long long)aggregate));
}

}  // namespace

ShardingPlan greedy_shard(const std::vector<double>& costs,
                          const std::vector<TableSpec>& specs,
                          const std::vector<FeatureStats>& stats,
                          const SystemSpec& system) {
  validate(system);
  check_aggregate_capacity(specs, system);
  auto order = rank_tables(costs, specs);

  std::vector<uint32_t> gpu_of(specs.size(), 0);
  std::vector<bool> in_hbm(specs.size(), false);
  std::vector<double> hbm_cost_sum(system.num_gpus, 0.0);
  std::vector<double> total_cost_sum(system.num_gpus, 0.0);
  std::vector<uint64_t> hbm_used(system.num_gpus, 0);
  std::vector<uint64_t> uvm_used(system.num_gpus, 0);
  double uvm_scale = system.bw_hbm / system.bw_uvm;

  bool hbm_phase = true;
  for (size_t pos = 0; pos < order.size(); ++pos) {
    uint32_t j = order[pos].index;
    uint64_t bytes = specs[j].bytes();
    if (hbm_phase) {
      uint32_t pick = UINT32_MAX;
      if (pos < system.num_gpus) {
        // First M tables: one per GPU, in descending cost order.
        uint32_t g = static_cast<uint32_t>(pos);
        if (hbm_used[g] + bytes <= system.cap_hbm_bytes) pick = g;
      } else {
        double best = 0.0;
        for (uint32_t g = 0; g < system.num_gpus; ++g) {
          if (hbm_used[g] + bytes > system.cap_hbm_bytes) continue;
          if (pick == UINT32_MAX || hbm_cost_sum[g] < best) {
            pick = g;
            best = hbm_cost_sum[g];
          }
        }
      }
      if (pick != UINT32_MAX) {
        gpu_of[j] = pick;
        in_hbm[j] = true;
        hbm_used[pick] += bytes;
        hbm_cost_sum[pick] += order[pos].cost;
        total_cost_sum[pick] += order[pos].cost;
        continue;
      }
      hbm_phase = false;  // this and all later tables go to the slow tier
    }
    uint32_t pick = UINT32_MAX;
    double best = 0.0;
    for (uint32_t g = 0; g < system.num_gpus; ++g) {
      if (uvm_used[g] + bytes > system.cap_dram_bytes) continue;
      if (pick == UINT32_MAX || total_cost_sum[g] < best) {
        pick = g;
        best = total_cost_sum[g];
      }
    }
    if (pick == UINT32_MAX)
      throw InfeasibleError(strfmt(
          "greedy: table %u (%llu bytes) fits no GPU's slow tier",
          specs[j].table_id, (unsigned long long)bytes));
    gpu_of[j] = pick;
    in_hbm[j] = false;
    uvm_used[pick] += bytes;
    total_cost_sum[pick] += order[pos].cost * uvm_scale;
  }

  std::string name = std::string("greedy");
  return assemble(specs, stats, system, gpu_of, in_hbm, name);
}

ShardingPlan ldm_shard(const std::vector<double>& costs,
                       const std::vector<TableSpec>& specs,
                       const std::vector<FeatureStats>& stats,
                       const SystemSpec& system) {
  validate(system);
  check_aggregate_capacity(specs, system);
  auto order = rank_tables(costs, specs);
  uint32_t m = system.num_gpus;

  // Each element is an M-tuple of (sum, tables) slots kept sorted by
  // descending sum; merging pairs the largest slot of one with the smallest
  // of the other. The queue pops the largest spread first; ties pop the
  // earliest-created element.
  struct Slot {
    double sum = 0.0;
    std::vector<uint32_t> tables;
  };
  struct Elem {
    std::vector<Slot> slots;
    uint64_t seq = 0;
    double spread() const { return slots.front().sum - slots.back().sum; }
  };
  auto cmp = [](const Elem& a, const Elem& b) {
    if (a.spread() != b.spread()) return a.spread() < b.spread();
    return a.seq > b.seq;
  };
  std::priority_queue<Elem, std::vector<Elem>, decltype(cmp)> heap(cmp);

  uint64_t seq = 0;
  for (const auto& r : order) {
    Elem e;
    e.slots.resize(m);
    e.slots[0].sum = r.cost;
    e.slots[0].tables = {r.index};
    e.seq = seq++;
    heap.push(std::move(e));
  }
  while (heap.size() > 1) {
    Elem a = heap.top();
    heap.pop();
    Elem b = heap.top();
    heap.pop();
    Elem merged;
    merged.slots.resize(m);
    for (uint32_t s = 0; s < m; ++s) {
      auto& dst = merged.slots[s];
      const auto& hi = a.slots[s];
      const auto& lo = b.slots[m - 1 - s];
      dst.sum = hi.sum + lo.sum;
      dst.tables = hi.tables;
      dst.tables.insert(dst.tables.end(), lo.tables.begin(), lo.tables.end());
    }
    std::stable_sort(merged.slots.begin(), merged.slots.end(),
                     [](const Slot& x, const Slot& y) { return x.sum > y.sum; });
    merged.seq = seq++;
    heap.push(std::move(merged));
  }

  Elem final_elem = heap.top();
  // Partitions in descending sum order onto ascending GPU ids.
  std::vector<uint32_t> gpu_of(specs.size(), 0);
  std::vector<bool> in_hbm(specs.size(), false);
  std::vector<uint64_t> hbm_used(m, 0), uvm_used(m, 0);
  for (uint32_t g = 0; g < m; ++g) {
    // Tables of this partition in descending cost order (ties table id).
    std::vector<uint32_t> tables = final_elem.slots[g].tables;
    std::sort(tables.begin(), tables.end(), [&](uint32_t a, uint32_t b) {
      if (costs[a] != costs[b]) return costs[a] > costs[b];
      return specs[a].table_id < specs[b].table_id;
    });
    for (uint32_t j : tables) {
      uint64_t bytes = specs[j].bytes();
      gpu_of[j] = g;
      if (hbm_used[g] + bytes <= system.cap_hbm_bytes) {
        in_hbm[j] = true;
        hbm_used[g] += bytes;
      } else if (uvm_used[g] + bytes <= system.cap_dram_bytes) {
        in_hbm[j] = false;
        uvm_used[g] += bytes;
      } else {
        throw InfeasibleError(strfmt(
            "ldm: table %u (%llu bytes) fits neither tier of gpu %u",
            specs[j].table_id, (unsigned long long)bytes, g));
      }
    }
  }
  return assemble(specs, stats, system, gpu_of, in_hbm, "ldm");
}

}  // namespace shardplan

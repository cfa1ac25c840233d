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

// Test-only reference implementations, kept independent of the library code
// paths they check: a prefix-scan inverse CDF, an exhaustive planner, and a
// row-set overlap count. Plus small random-instance generators shared by
// the unit and acceptance suites.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <unordered_map>
#include <vector>

#include "shardplan/milp.hpp"
#include "shardplan/profiler.hpp"
#include "shardplan/rng.hpp"

namespace shardplan::testing {

// Minimal top-row prefix whose share reaches i/100, by literal scan.
inline std::vector<uint64_t> icdf_prefix_scan(std::vector<uint64_t> counts) {
  std::sort(counts.begin(), counts.end(), std::greater<>());
  long double total = 0;
  for (uint64_t c : counts) total += c;
  std::vector<uint64_t> out(101, 0);
  for (int i = 1; i <= 100; ++i) {
    long double need = total * i / 100.0L;
    long double cum = 0;
    uint64_t k = 0;
    while (cum + 1e-18L < need && k < counts.size()) {
      cum += counts[k];
      ++k;
    }
    out[i] = k;
  }
  return out;
}

// Exhaustive enumeration over every (assignment, step) combination. Per
// assignment the per-GPU minima are independent, so each GPU's step vectors
// are enumerated separately; this is still full enumeration of the joint
// space, evaluated without redundancy.
struct BruteForceResult {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
};

inline BruteForceResult brute_force_solve(const MilpInstance& inst) {
  const auto& sys = inst.system;
  size_t j_count = inst.tables.size();
  uint32_t steps = inst.step_count;

  // Per-table per-step mem bytes and weighted cost.
  std::vector<std::vector<uint64_t>> mem(j_count);
  std::vector<std::vector<double>> cost(j_count);
  for (size_t j = 0; j < j_count; ++j) {
    const auto& t = inst.tables[j];
    double w = inst.ablation.use_coverage ? t.stats.coverage : 1.0;
    mem[j].resize(steps + 1);
    cost[j].resize(steps + 1);
    for (uint32_t i = 0; i <= steps; ++i) {
      mem[j][i] = rows_at_step(t.stats.icdf_steps, i, steps) * t.spec.dim *
                  t.spec.elem_bytes;
      cost[j][i] = w * table_cost(t.spec, t.stats,
                                  static_cast<double>(i) / steps, sys,
                                  inst.ablation);
    }
  }

  // Min cost of one GPU's member set subject to both capacity sides, by
  // full enumeration of its step vectors.
  auto gpu_min = [&](const std::vector<size_t>& members) {
    uint64_t emb = 0;
    for (size_t j : members) emb += inst.tables[j].spec.bytes();
    uint64_t lo = emb > sys.cap_dram_bytes ? emb - sys.cap_dram_bytes : 0;
    double best = std::numeric_limits<double>::infinity();
    std::function<void(size_t, uint64_t, double)> rec = [&](size_t d,
                                                            uint64_t m,
                                                            double c) {
      if (m > sys.cap_hbm_bytes) return;
      if (d == members.size()) {
        if (m >= lo) best = std::min(best, c);
        return;
      }
      for (uint32_t i = 0; i <= steps; ++i)
        rec(d + 1, m + mem[members[d]][i], c + cost[members[d]][i]);
    };
    rec(0, 0, 0.0);
    return best;
  };

  BruteForceResult out;
  std::vector<uint32_t> assign(j_count, 0);
  std::function<void(size_t)> enumerate = [&](size_t d) {
    if (d == j_count) {
      std::vector<std::vector<size_t>> members(sys.num_gpus);
      for (size_t j = 0; j < j_count; ++j) members[assign[j]].push_back(j);
      double peak = 0.0;
      for (uint32_t g = 0; g < sys.num_gpus; ++g) {
        if (members[g].empty()) continue;
        double c = gpu_min(members[g]);
        if (!std::isfinite(c)) return;  // this assignment infeasible
        peak = std::max(peak, c);
      }
      if (peak < out.objective) {
        out.objective = peak;
        out.feasible = true;
      }
      return;
    }
    for (uint32_t g = 0; g < sys.num_gpus; ++g) {
      assign[d] = g;
      enumerate(d + 1);
    }
  };
  enumerate(0);
  return out;
}

// Kolmogorov-Smirnov distance between two profiled row-frequency CDFs,
// accumulated over a common ordering (the reference profile's frequency
// ranking). The compared profile must come from a subset of the reference
// trace, so its rows are a subset of the reference rows.
inline double cdf_ks_distance(const FeatureStats& reference,
                              const FeatureStats& sampled) {
  std::unordered_map<uint32_t, double> share;
  for (size_t r = 0; r < sampled.rows_by_rank.size(); ++r) {
    double prev = r ? sampled.access_cdf[r - 1] : 0.0;
    share[sampled.rows_by_rank[r]] = sampled.access_cdf[r] - prev;
  }
  double s = 0.0, ks = 0.0;
  for (size_t r = 0; r < reference.rows_by_rank.size(); ++r) {
    auto it = share.find(reference.rows_by_rank[r]);
    if (it != share.end()) s += it->second;
    ks = std::max(ks, std::fabs(reference.access_cdf[r] - s));
  }
  return ks;
}

// Row-set overlap by explicit set arithmetic over remap-tier membership.
struct OverlapCounts {
  uint64_t b_uvm = 0, b_hbm = 0;
  uint64_t uvm_to_hbm = 0, hbm_to_uvm = 0;
};

inline OverlapCounts overlap_by_sets(
    const std::vector<std::set<uint64_t>>& a_fast_rows,
    const std::vector<std::set<uint64_t>>& b_fast_rows,
    const std::vector<uint64_t>& hash_sizes) {
  OverlapCounts out;
  for (size_t j = 0; j < hash_sizes.size(); ++j) {
    for (uint64_t row = 0; row < hash_sizes[j]; ++row) {
      bool in_a = a_fast_rows[j].count(row) > 0;
      bool in_b = b_fast_rows[j].count(row) > 0;
      if (!in_b) {
        ++out.b_uvm;
        if (in_a) ++out.uvm_to_hbm;
      } else {
        ++out.b_hbm;
        if (!in_a) ++out.hbm_to_uvm;
      }
    }
  }
  return out;
}

// -- Random small instances ------------------------------------------------

struct RandomInstanceOptions {
  uint32_t max_tables = 6;
  uint32_t max_gpus = 3;
  std::vector<uint32_t> step_choices = {4, 10};
  bool force_feasible = true;
};

inline MilpInstance random_instance(uint64_t seed,
                                    const RandomInstanceOptions& opt = {}) {
  SplitMix64 rng(seed);
  uint32_t j_count = 1 + rng.next_below(opt.max_tables);
  uint32_t m = 1 + rng.next_below(opt.max_gpus);
  uint32_t steps =
      opt.step_choices[rng.next_below(opt.step_choices.size())];

  std::vector<TableSpec> specs;
  std::vector<FeatureStats> stats;
  uint64_t total_bytes = 0;
  for (uint32_t j = 0; j < j_count; ++j) {
    TableSpec t;
    t.table_id = j;
    t.hash_size = 100 + rng.next_below(5000);
    t.cardinality = t.hash_size;
    t.dim = 1u << rng.next_below(5);
    t.elem_bytes = rng.next_below(2) ? 2 : 4;
    specs.push_back(t);
    total_bytes += t.bytes();

    FeatureStats st;
    st.table_id = j;
    st.coverage = 0.05 + 0.95 * rng.next_double();
    st.avg_pooling = 1.0 + rng.next_double() * 50.0;
    uint64_t distinct = 1 + rng.next_below(t.hash_size);
    st.distinct_rows_accessed = distinct;
    st.total_accesses = distinct * (1 + rng.next_below(50));
    // Synthesize a monotone ICDF: a power-ish curve through (100, distinct).
    double shape = 0.3 + 2.0 * rng.next_double();
    st.icdf_steps.resize(101);
    st.icdf_steps[0] = 0;
    for (int i = 1; i <= 100; ++i) {
      double frac = std::pow(i / 100.0, shape);
      uint64_t rows = std::max<uint64_t>(
          1, static_cast<uint64_t>(std::ceil(frac * distinct)));
      st.icdf_steps[i] = std::max(st.icdf_steps[i - 1], std::min(rows, distinct));
    }
    st.icdf_steps[100] = distinct;
    stats.push_back(st);
  }

  SystemSpec sys;
  sys.num_gpus = m;
  sys.batch_size = 1024;
  sys.bw_hbm = 1.555e12;
  sys.bw_uvm = 1.6e10;
  if (opt.force_feasible) {
    // Capacities with headroom: fast tier fits 30-100% of all bytes,
    // slow tier fits everything.
    double frac = 0.3 + 0.7 * rng.next_double();
    sys.cap_hbm_bytes =
        std::max<uint64_t>(1, static_cast<uint64_t>(total_bytes * frac / m));
    sys.cap_dram_bytes = total_bytes + 1;
  } else {
    sys.cap_hbm_bytes = std::max<uint64_t>(1, total_bytes / (4 * m));
    sys.cap_dram_bytes = std::max<uint64_t>(1, total_bytes / (4 * m));
  }

  return build_instance(stats, specs, sys, {}, steps);
}

}  // namespace shardplan::testing

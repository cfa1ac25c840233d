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

#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "shardplan/baselines.hpp"

using namespace shardplan;

namespace {

FeatureStats quick_stats(uint32_t table_id, double coverage, double pooling,
                         uint64_t distinct) {
  FeatureStats st;
  st.table_id = table_id;
  st.coverage = coverage;
  st.avg_pooling = pooling;
  st.distinct_rows_accessed = distinct;
  st.total_accesses = distinct * 4;
  st.icdf_steps.assign(101, distinct);
  st.icdf_steps[0] = 0;
  return st;
}

// Five tables with the classic {8,7,6,5,4} cost list and roomy capacities.
struct Fixture {
  std::vector<TableSpec> specs;
  std::vector<FeatureStats> stats;
  std::vector<double> costs;
  SystemSpec sys;
};

Fixture classic(uint32_t gpus) {
  Fixture f;
  f.costs = {8, 7, 6, 5, 4};
  for (uint32_t j = 0; j < 5; ++j) {
    f.specs.push_back(TableSpec{j, 1000, 1000, 4, 4});
    f.stats.push_back(quick_stats(j, 1.0, 2.0, 800));
  }
  f.sys.num_gpus = gpus;
  f.sys.batch_size = 1024;
  f.sys.cap_hbm_bytes = 1ULL << 30;
  f.sys.cap_dram_bytes = 1ULL << 30;
  f.sys.bw_hbm = 1.555e12;
  f.sys.bw_uvm = 1.6e10;
  return f;
}

std::vector<double> per_gpu_cost_sums(const ShardingPlan& plan,
                                      const std::vector<double>& costs,
                                      const std::vector<TableSpec>& specs,
                                      uint32_t gpus) {
  std::vector<double> sums(gpus, 0.0);
  for (const auto& e : plan.entries) {
    size_t j = 0;
    while (specs[j].table_id != e.table_id) ++j;
    sums[e.gpu] += costs[j];
  }
  return sums;
}

}  // namespace

TEST_CASE("fixed cost functions") {
  TableSpec spec{0, 1u << 20, 1000000, 64, 4};
  FeatureStats st = quick_stats(0, 1.0, 20.0, 1000);

  CHECK(table_fixed_cost(spec, nullptr, CostKind::kSize) ==
        doctest::Approx(6.4e7));
  CHECK(table_fixed_cost(spec, &st, CostKind::kLookup) ==
        doctest::Approx(1280.0));
  CHECK(table_fixed_cost(spec, &st, CostKind::kSizeAndLookup) ==
        doctest::Approx(7680.0));

  SUBCASE("degenerate hash size clamps the log factor") {
    TableSpec tiny{0, 4, 4, 64, 4};
    // log10(4) ~ 0.602, positive; truly degenerate is hash_size < 1 which
    // the spec forbids, so exercise hash_size < 10 just below 10.
    CHECK(table_fixed_cost(tiny, &st, CostKind::kSizeAndLookup) ==
          doctest::Approx(20.0 * 64 * std::log10(4.0)));
  }

  SUBCASE("lookup without stats is an error") {
    CHECK_THROWS_AS(table_fixed_cost(spec, nullptr, CostKind::kLookup),
                    InvalidArgument);
  }
}

TEST_CASE("greedy follows the stated placement rule") {
  auto f = classic(2);
  auto plan = greedy_shard(f.costs, f.specs, f.stats, f.sys);
  auto sums = per_gpu_cost_sums(plan, f.costs, f.specs, 2);
  // Hand-run: gpu0 {8,5,4} = 17, gpu1 {7,6} = 13.
  CHECK(sums[0] == doctest::Approx(17.0));
  CHECK(sums[1] == doctest::Approx(13.0));
  for (const auto& e : plan.entries) CHECK(e.pct == 1.0);
}

TEST_CASE("greedy with equal costs balances table counts") {
  auto f = classic(3);
  std::vector<double> equal(5, 2.0);
  auto plan = greedy_shard(equal, f.specs, f.stats, f.sys);
  std::vector<int> counts(3, 0);
  for (const auto& e : plan.entries) counts[e.gpu]++;
  int mn = *std::min_element(counts.begin(), counts.end());
  int mx = *std::max_element(counts.begin(), counts.end());
  CHECK(mx - mn <= 1);
}

TEST_CASE("greedy overflow goes to the slow tier") {
  auto f = classic(1);
  // Fast tier fits exactly two tables (16000 bytes each).
  f.sys.cap_hbm_bytes = 2 * f.specs[0].bytes();
  auto plan = greedy_shard(f.costs, f.specs, f.stats, f.sys);
  int uvm = 0;
  for (const auto& e : plan.entries) {
    if (e.pct == 0.0) {
      ++uvm;
      CHECK(e.hbm_rows == 0);
      CHECK(e.mem_bytes == 0);
    }
  }
  CHECK(uvm == 3);
}

TEST_CASE("greedy reports infeasibility with the table name") {
  auto f = classic(1);
  f.sys.cap_hbm_bytes = f.specs[0].bytes();
  f.sys.cap_dram_bytes = f.specs[0].bytes();
  CHECK_THROWS_AS(greedy_shard(f.costs, f.specs, f.stats, f.sys),
                  InfeasibleError);
}

TEST_CASE("ldm reproduces the two-way differencing example") {
  auto f = classic(2);
  auto plan = ldm_shard(f.costs, f.specs, f.stats, f.sys);
  auto sums = per_gpu_cost_sums(plan, f.costs, f.specs, 2);
  // Hand-run Karmarkar-Karp: partitions {7,5,4} = 16 and {8,6} = 14.
  CHECK(std::max(sums[0], sums[1]) == doctest::Approx(16.0));
  CHECK(std::min(sums[0], sums[1]) == doctest::Approx(14.0));
  CHECK(std::fabs(sums[0] - sums[1]) == doctest::Approx(2.0));
}

TEST_CASE("ldm trivial cases") {
  SUBCASE("single table lands alone") {
    auto f = classic(2);
    f.specs.resize(1);
    f.stats.resize(1);
    f.costs.resize(1);
    auto plan = ldm_shard(f.costs, f.specs, f.stats, f.sys);
    CHECK(plan.entries.size() == 1);
  }
  SUBCASE("two equal costs split evenly") {
    auto f = classic(2);
    f.specs.resize(2);
    f.stats.resize(2);
    f.costs = {5, 5};
    auto plan = ldm_shard(f.costs, f.specs, f.stats, f.sys);
    auto sums = per_gpu_cost_sums(plan, f.costs, f.specs, 2);
    CHECK(sums[0] == doctest::Approx(sums[1]));
  }
}

TEST_CASE("both heuristics emit deterministic, validator-clean plans") {
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    auto inst = testing::random_instance(seed);
    std::vector<TableSpec> specs;
    std::vector<FeatureStats> stats;
    for (const auto& t : inst.tables) {
      specs.push_back(t.spec);
      stats.push_back(t.stats);
    }
    // Whole tables must fit somewhere for baselines; give the fast tier
    // room for the largest table.
    uint64_t biggest = 0;
    for (const auto& s : specs) biggest = std::max(biggest, s.bytes());
    inst.system.cap_hbm_bytes = std::max(inst.system.cap_hbm_bytes, biggest);

    for (CostKind kind :
         {CostKind::kSize, CostKind::kLookup, CostKind::kSizeAndLookup}) {
      std::vector<double> costs;
      for (size_t j = 0; j < specs.size(); ++j)
        costs.push_back(table_fixed_cost(specs[j], &stats[j], kind));
      auto g1 = greedy_shard(costs, specs, stats, inst.system);
      auto g2 = greedy_shard(costs, specs, stats, inst.system);
      auto l1 = ldm_shard(costs, specs, stats, inst.system);
      auto l2 = ldm_shard(costs, specs, stats, inst.system);
      for (size_t i = 0; i < g1.entries.size(); ++i) {
        CHECK(g1.entries[i].gpu == g2.entries[i].gpu);
        CHECK(l1.entries[i].gpu == l2.entries[i].gpu);
      }
      MilpInstance check_inst =
          build_instance(stats, specs, inst.system, {}, 1);
      auto gv = check_plan(g1, check_inst);
      auto lv = check_plan(l1, check_inst);
      if (gv) FAIL("greedy: ", *gv);
      if (lv) FAIL("ldm: ", *lv);
    }
  }
}

TEST_CASE("ldm beats or ties greedy on most random partition instances") {
  SplitMix64 rng(424242);
  int ldm_no_worse = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    uint32_t n = 4 + rng.next_below(24);
    uint32_t m = 2 + rng.next_below(7);
    std::vector<TableSpec> specs;
    std::vector<FeatureStats> stats;
    std::vector<double> costs;
    for (uint32_t j = 0; j < n; ++j) {
      specs.push_back(TableSpec{j, 100, 100, 4, 4});
      stats.push_back(quick_stats(j, 1.0, 2.0, 50));
      costs.push_back(1.0 + rng.next_below(1000));
    }
    SystemSpec sys;
    sys.num_gpus = m;
    sys.batch_size = 1024;
    sys.cap_hbm_bytes = 1ULL << 30;
    sys.cap_dram_bytes = 1ULL << 30;
    sys.bw_hbm = 2e12;
    sys.bw_uvm = 2e10;

    auto g = greedy_shard(costs, specs, stats, sys);
    auto l = ldm_shard(costs, specs, stats, sys);
    auto gs = per_gpu_cost_sums(g, costs, specs, m);
    auto ls = per_gpu_cost_sums(l, costs, specs, m);
    double gmax = *std::max_element(gs.begin(), gs.end());
    double lmax = *std::max_element(ls.begin(), ls.end());
    if (lmax <= gmax + 1e-9) ++ldm_no_worse;
  }
  // Statistical, not per-instance: differencing is generally the better
  // partitioner.
  CHECK(ldm_no_worse >= 0.8 * trials);
}

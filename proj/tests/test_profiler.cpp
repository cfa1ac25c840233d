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

#include <cstdio>
#include <filesystem>
#include <unordered_map>
#include <unordered_set>

#include "doctest.h"
#include "oracles.hpp"
#include "shardplan/profiler.hpp"

using namespace shardplan;

namespace {

// Hand-built two-feature dataset: feature A present in all three samples
// with 4+4+3 hashed ids, feature B present only in the first with 3 ids.
Trace worked_example() {
  Trace t;
  t.tables = {TableSpec{0, 1000, 100, 4, 4}, TableSpec{1, 1000, 100, 4, 4}};
  t.num_samples = 3;
  auto add = [&](uint64_t sample, uint32_t table,
                 std::initializer_list<uint32_t> ids) {
    Trace::Record r;
    r.sample = sample;
    r.table = table;
    r.offset = t.ids.size();
    r.len = static_cast<uint32_t>(ids.size());
    t.ids.insert(t.ids.end(), ids);
    t.records.push_back(r);
  };
  add(0, 0, {1, 5, 9, 15});
  add(0, 1, {2, 4, 8});
  add(1, 0, {5, 7, 9, 30});
  add(2, 0, {1, 5, 9});
  return t;
}

}  // namespace

TEST_CASE("worked pooling/coverage example") {
  auto stats = profile(worked_example(), 1.0, 0);
  REQUIRE(stats.size() == 2);
  CHECK(stats[0].coverage == doctest::Approx(1.0));
  CHECK(stats[0].avg_pooling == doctest::Approx(11.0 / 3.0));  // quoted 3.66
  CHECK(stats[1].coverage == doctest::Approx(1.0 / 3.0));      // quoted 0.33
  CHECK(stats[1].avg_pooling == doctest::Approx(3.0));
  CHECK(stats[0].total_accesses == 11);
  CHECK(stats[0].distinct_rows_accessed == 6);  // rows 1,5,7,9,15,30
}

TEST_CASE("point-mass feature") {
  Trace t;
  t.tables = {TableSpec{0, 10, 50, 4, 4}};
  t.num_samples = 20;
  for (uint64_t s = 0; s < 20; ++s) {
    Trace::Record r;
    r.sample = s;
    r.table = 0;
    r.offset = t.ids.size();
    r.len = 1;
    t.ids.push_back(0);
    t.records.push_back(r);
  }
  auto stats = profile(t, 1.0, 0);
  CHECK(stats[0].distinct_rows_accessed == 1);
  CHECK(stats[0].icdf_steps[0] == 0);
  for (int i = 1; i <= 100; ++i) CHECK(stats[0].icdf_steps[i] == 1);
}

TEST_CASE("build_icdf trivial shapes") {
  SUBCASE("uniform 200 rows") {
    std::vector<uint64_t> counts(200, 7);
    auto icdf = build_icdf(counts);
    CHECK(icdf[0] == 0);
    CHECK(icdf[50] == 100);
    CHECK(icdf[100] == 200);
  }
  SUBCASE("two-point 90/10") {
    std::vector<uint64_t> counts = {90, 10};
    auto icdf = build_icdf(counts);
    for (int i = 1; i <= 90; ++i) CHECK(icdf[i] == 1);
    for (int i = 91; i <= 100; ++i) CHECK(icdf[i] == 2);
  }
  SUBCASE("all-zero counts rejected") {
    std::vector<uint64_t> counts(5, 0);
    CHECK_THROWS_AS(build_icdf(counts), InvalidArgument);
  }
}

TEST_CASE("build_icdf equals the prefix-scan oracle on random vectors") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    size_t n = 1 + rng.next_below(1000);
    std::vector<uint64_t> counts(n);
    bool any = false;
    for (auto& c : counts) {
      c = rng.next_below(100);
      any |= c > 0;
    }
    if (!any) counts[0] = 1;
    auto got = build_icdf(counts);
    auto want = testing::icdf_prefix_scan(counts);
    REQUIRE(got.size() == 101);
    for (int i = 0; i <= 100; ++i) CHECK(got[i] == want[i]);
  }
}

TEST_CASE("icdf invariant under row relabeling") {
  SplitMix64 rng(5);
  std::vector<uint64_t> counts(500);
  for (auto& c : counts) c = rng.next_below(1000);
  counts[3] = 1;
  auto base = build_icdf(counts);
  // Any permutation of the counts yields the same steps.
  std::vector<uint64_t> shuffled = counts;
  for (size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[rng.next_below(i)]);
  CHECK(build_icdf(shuffled) == base);
}

TEST_CASE("profile at rate 1 reproduces exact access counts") {
  std::vector<WorkloadSpec> specs(1);
  specs[0].table = {0, 5000, 4000, 8, 4};
  specs[0].gen = {1.2, 6.0, 0.7, PoolingLaw::kPoisson};
  Trace t = generate_trace(specs, 30000, 44);

  std::unordered_map<uint32_t, uint64_t> counts;
  uint64_t total = 0, present = 0;
  for (const auto& r : t.records) {
    present += 1;
    total += r.len;
    for (uint32_t id : t.record_ids(r)) counts[id] += 1;
  }
  auto stats = profile(t, 1.0, 0);
  CHECK(stats[0].total_accesses == total);
  CHECK(stats[0].distinct_rows_accessed == counts.size());
  CHECK(stats[0].coverage == doctest::Approx(present / 30000.0));
  // CDF terminal value and monotonicity.
  REQUIRE(!stats[0].access_cdf.empty());
  CHECK(stats[0].access_cdf.back() == doctest::Approx(1.0).epsilon(1e-12));
  for (size_t i = 1; i < stats[0].access_cdf.size(); ++i)
    CHECK(stats[0].access_cdf[i] >= stats[0].access_cdf[i - 1]);
  // Ranked rows carry descending counts.
  for (size_t r = 1; r < stats[0].rows_by_rank.size(); ++r) {
    uint64_t a = counts[stats[0].rows_by_rank[r - 1]];
    uint64_t b = counts[stats[0].rows_by_rank[r]];
    CHECK(a >= b);
    if (a == b)
      CHECK(stats[0].rows_by_rank[r - 1] < stats[0].rows_by_rank[r]);
  }
}

TEST_CASE("sampled profile tracks the full profile") {
  std::vector<WorkloadSpec> specs(1);
  specs[0].table = {0, 60000, 50000, 16, 4};
  specs[0].gen = {1.2, 10.0, 0.8, PoolingLaw::kPoisson};
  Trace t = generate_trace(specs, 200000, 7);

  auto full = profile(t, 1.0, 0);
  auto sampled = profile(t, 0.01, 1);

  double ks = testing::cdf_ks_distance(full[0], sampled[0]);
  CHECK(ks <= 0.02);
  CHECK(std::fabs(sampled[0].avg_pooling - full[0].avg_pooling) /
            full[0].avg_pooling <=
        0.02);
  CHECK(std::fabs(sampled[0].coverage - full[0].coverage) <= 0.01);
}

TEST_CASE("profile rejects degenerate sampling") {
  Trace t = worked_example();
  CHECK_THROWS_AS(profile(t, 0.0, 0), InvalidArgument);
  CHECK_THROWS_AS(profile(Trace{}, 0.5, 0), InvalidArgument);
  // A rate so small that no sample is selected.
  CHECK_THROWS_AS(profile(t, 1e-12, 0), InvalidArgument);
}

TEST_CASE("hash utilization fractions") {
  TableSpec spec{0, 1000, 1000, 4, 4};

  SUBCASE("untouched table") {
    FeatureStats st;
    st.distinct_rows_accessed = 0;
    auto [sparsity, collisions] = hash_utilization(st, spec, 0);
    CHECK(sparsity == doctest::Approx(1.0));
    CHECK(collisions == doctest::Approx(0.0));
  }

  SUBCASE("pigeonhole: two raw ids, one bucket") {
    TableSpec tiny{0, 2, 1, 4, 4};
    FeatureStats st;
    st.distinct_rows_accessed = 1;
    auto [sparsity, collisions] = hash_utilization(st, tiny, 2);
    CHECK(collisions == doctest::Approx(1.0));
    CHECK(sparsity == doctest::Approx(0.0));
  }

  SUBCASE("birthday regime: N = H uniform raws") {
    const uint64_t h = 100000;
    TableSpec big{0, h, h, 4, 4};
    SplitMix64 rng(3);
    std::unordered_set<uint64_t> raws;
    while (raws.size() < h) raws.insert(rng.next());
    std::unordered_set<uint32_t> rows;
    for (uint64_t r : raws) rows.insert(hash_value(r, h));
    FeatureStats st;
    st.distinct_rows_accessed = rows.size();
    auto [sparsity, collisions] = hash_utilization(st, big, raws.size());
    CHECK(sparsity >= 0.35);
    CHECK(sparsity <= 0.39);
    CHECK(collisions == doctest::Approx(1.0 - sparsity - 0.0).epsilon(0.2));
  }
}

TEST_CASE("stats files round-trip the serialized fields") {
  std::vector<WorkloadSpec> specs(2);
  specs[0].table = {0, 3000, 2500, 8, 4};
  specs[0].gen = {1.0, 3.0, 0.6, PoolingLaw::kPoisson};
  specs[1].table = {3, 1000, 800, 4, 2};
  specs[1].gen = {0.5, 2.0, 0.9, PoolingLaw::kConstant};
  Trace t = generate_trace(specs, 5000, 1);
  auto stats = profile(t, 1.0, 0);

  auto path =
      (std::filesystem::temp_directory_path() / "roundtrip.stats").string();
  write_stats(stats, path, {"config=deadbeef seed=1"});
  auto back = read_stats(path);
  REQUIRE(back.size() == stats.size());
  for (size_t j = 0; j < stats.size(); ++j) {
    CHECK(back[j].table_id == stats[j].table_id);
    CHECK(back[j].coverage == doctest::Approx(stats[j].coverage));
    CHECK(back[j].avg_pooling == doctest::Approx(stats[j].avg_pooling));
    CHECK(back[j].distinct_rows_accessed == stats[j].distinct_rows_accessed);
    CHECK(back[j].total_accesses == stats[j].total_accesses);
    CHECK(back[j].icdf_steps == stats[j].icdf_steps);
  }
  std::remove(path.c_str());
}

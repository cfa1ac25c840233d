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

#include <span>
#include <string>
#include <vector>

#include "shardplan/workload.hpp"

namespace shardplan {

inline constexpr int kIcdfPercentSteps = 100;  // icdf_steps has 101 entries

/// Per-table access profile. The frequency sort orders rows by descending
/// access count with ties broken by ascending row index; rows never accessed
/// rank after all accessed rows. icdf_steps[i] is the fewest top-frequency
/// rows covering i% of accesses.
struct FeatureStats {
  uint32_t table_id = 0;
  double coverage = 0.0;
  double avg_pooling = 0.0;  // mean hot ids per present sample
  uint64_t distinct_rows_accessed = 0;
  uint64_t total_accesses = 0;
  std::vector<uint64_t> icdf_steps;  // 101 entries

  // Cumulative access fraction of the top-(k+1) rows at index k. Size =
  // distinct_rows_accessed.
  std::vector<double> access_cdf;
  // Row index at each frequency rank. Required by remap construction; empty
  // when the stats were loaded from a stats file (re-profile to rebuild).
  std::vector<uint32_t> rows_by_rank;
};

/// Profiles a uniform per-sample subset of the trace at `sample_rate` and
/// returns one FeatureStats per trace table, in trace table order.
std::vector<FeatureStats> profile(const Trace& trace, double sample_rate,
                                  uint64_t seed);

/// 101-entry inverse CDF from per-row access counts: entry i is the minimal
/// number of top-frequency rows whose cumulative share reaches i/100.
std::vector<uint64_t> build_icdf(std::span<const uint64_t> counts_per_row);

/// (sparsity_fraction, collision_fraction) of the table's hash space.
/// `distinct_raw_ids_seen` comes from generator metadata (GenStats).
std::pair<double, double> hash_utilization(const FeatureStats& stats,
                                           const TableSpec& spec,
                                           uint64_t distinct_raw_ids_seen);

// Stats file: plain structured text, one block per table (see
// docs/formats.md). rows_by_rank and access_cdf are not serialized.
void write_stats(const std::vector<FeatureStats>& stats,
                 const std::string& path,
                 const std::vector<std::string>& comments = {});
std::vector<FeatureStats> read_stats(const std::string& path);

}  // namespace shardplan

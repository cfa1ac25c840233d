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

#include <cstdint>
#include <span>
#include <vector>

#include "shardplan/rng.hpp"
#include "shardplan/types.hpp"

namespace shardplan {

/// Maps a raw categorical value to a table row. Deterministic and
/// platform-independent: SplitMix64 finalizer, then modulo.
inline uint32_t hash_value(uint64_t raw_id, uint64_t hash_size) {
  if (hash_size == 0) throw InvalidArgument("hash_value: hash_size must be >= 1");
  return static_cast<uint32_t>(mix64(raw_id) % hash_size);
}

struct WorkloadSpec {
  TableSpec table;
  FeatureGenSpec gen;
};

/// A multi-hot categorical training trace. Feature absence in a sample is
/// represented by record omission. Hashed ids are stored in one flat pool;
/// records are sorted by (sample, table) with no duplicates.
struct Trace {
  struct Record {
    uint64_t sample = 0;
    uint32_t table = 0;
    uint64_t offset = 0;  // into ids
    uint32_t len = 0;
  };

  std::vector<TableSpec> tables;
  uint64_t num_samples = 0;
  std::vector<Record> records;
  std::vector<uint32_t> ids;

  std::span<const uint32_t> record_ids(const Record& r) const {
    return {ids.data() + r.offset, r.len};
  }
  uint64_t total_accesses() const { return ids.size(); }
};

/// Generator-side metadata that is not part of the trace file format (used
/// by hash-utilization analysis, which needs pre-hash distinct counts).
struct GenStats {
  std::vector<uint64_t> distinct_raw_ids;  // per table, in spec order
};

/// Draws pooling factors k >= 1 with mean `mean` under one of three laws.
/// The lognormal law fixes sigma = 0.75 and calibrates mu so that the
/// discretized, clamped variate keeps the requested mean.
class PoolingSampler {
 public:
  PoolingSampler(PoolingLaw law, double mean);
  uint32_t operator()(SplitMix64& rng) const;

 private:
  PoolingLaw law_;
  double mean_;
  double lambda_ = 0.0;  // poisson: mean of the +1-shifted variate
  double mu_ = 0.0;      // lognormal location after calibration
  double sigma_ = 0.0;
};

/// Deterministic Poisson variate (Knuth product method below mean 30,
/// transformed rejection above). Exposed for tests.
uint64_t poisson_draw(SplitMix64& rng, double mean);

/// Standard normal via Box-Muller. Exposed for tests.
double normal_draw(SplitMix64& rng);

/// Generates `num_samples` samples for the given features. Fully
/// deterministic: every (sample, table) pair draws from its own substream of
/// `seed`, so any partition of the sample range generates identical output.
Trace generate_trace(const std::vector<WorkloadSpec>& specs,
                     uint64_t num_samples, uint64_t seed,
                     GenStats* gen_stats = nullptr);

/// Range variant used for splice tests and parallel generation; emits
/// records for samples [first, first + count).
Trace generate_trace_range(const std::vector<WorkloadSpec>& specs,
                           uint64_t first, uint64_t count,
                           uint64_t num_samples_total, uint64_t seed,
                           GenStats* gen_stats = nullptr);

}  // namespace shardplan

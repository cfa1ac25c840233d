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
#include <string>
#include <vector>

#include "shardplan/error.hpp"

namespace shardplan {

/// One embedding table: its hashed row space and row geometry.
struct TableSpec {
  uint32_t table_id = 0;
  uint64_t cardinality = 0;  // distinct raw categorical values, pre-hash
  uint64_t hash_size = 0;    // rows in the table, post-hash
  uint32_t dim = 0;          // embedding dimension
  uint32_t elem_bytes = 0;   // bytes per element, 2 or 4

  uint64_t bytes() const { return hash_size * dim * elem_bytes; }
};

// Row indices are carried as uint32 and the remap encoding spends the sign
// bit, so a table may hold at most 2^31 - 1 rows.
inline constexpr uint64_t kMaxHashSize = 0x7FFFFFFFULL;

inline void validate(const TableSpec& t) {
  if (t.hash_size < 1)
    throw InvalidArgument(strfmt("table %u: hash_size must be >= 1", t.table_id));
  if (t.hash_size > kMaxHashSize)
    throw InvalidArgument(
        strfmt("table %u: hash_size %llu exceeds the 2^31-1 row limit imposed "
               "by the 4-byte remap encoding",
               t.table_id, (unsigned long long)t.hash_size));
  if (t.dim < 1)
    throw InvalidArgument(strfmt("table %u: dim must be >= 1", t.table_id));
  if (t.elem_bytes != 2 && t.elem_bytes != 4)
    throw InvalidArgument(
        strfmt("table %u: elem_bytes must be 2 or 4", t.table_id));
  if (t.cardinality < 1)
    throw InvalidArgument(strfmt("table %u: cardinality must be >= 1", t.table_id));
}

enum class PoolingLaw { kConstant, kPoisson, kLognormal };

const char* to_string(PoolingLaw law);
PoolingLaw pooling_law_from_string(const std::string& s);

/// Generator knobs for one synthetic sparse feature.
struct FeatureGenSpec {
  double zipf_exponent = 1.0;  // skew of the raw value distribution
  double mean_pooling = 1.0;   // expected hot ids per present sample
  double coverage = 1.0;       // probability the feature is present
  PoolingLaw pooling_law = PoolingLaw::kConstant;
};

inline void validate(const FeatureGenSpec& g, uint32_t table_id) {
  if (!(g.zipf_exponent >= 0.0))
    throw InvalidArgument(strfmt("table %u: zipf_exponent must be >= 0", table_id));
  if (!(g.coverage >= 0.0 && g.coverage <= 1.0))
    throw InvalidArgument(strfmt("table %u: coverage must be in [0,1]", table_id));
  if (g.coverage > 0.0 && !(g.mean_pooling >= 1.0))
    throw InvalidArgument(
        strfmt("table %u: mean_pooling must be >= 1 when coverage > 0", table_id));
}

/// The modeled training node: M identical GPUs, each with a fast on-device
/// tier and a slow host tier reachable at uvm bandwidth.
struct SystemSpec {
  uint32_t num_gpus = 0;        // M
  uint64_t batch_size = 0;      // B
  uint64_t cap_hbm_bytes = 0;   // fast-tier capacity per GPU
  uint64_t cap_dram_bytes = 0;  // slow-tier capacity per GPU
  double bw_hbm = 0.0;          // bytes/s
  double bw_uvm = 0.0;          // bytes/s
};

// Defaults mirror an A100-class part (HBM) and PCIe-3.0x16-class UVM path.
// These are configuration values; nothing in the planner hard-codes them.
inline constexpr double kDefaultBwHbm = 1.555e12;
inline constexpr double kDefaultBwUvm = 1.6e10;
inline constexpr uint64_t kDefaultBatchSize = 16384;

inline void validate(const SystemSpec& s) {
  if (s.num_gpus < 1) throw InvalidArgument("system: num_gpus must be >= 1");
  if (s.batch_size < 1) throw InvalidArgument("system: batch_size must be >= 1");
  if (s.cap_hbm_bytes < 1)
    throw InvalidArgument("system: cap_hbm_bytes must be positive");
  if (s.cap_dram_bytes < 1)
    throw InvalidArgument("system: cap_dram_bytes must be positive");
  if (!(s.bw_hbm > 0.0) || !(s.bw_uvm > 0.0))
    throw InvalidArgument("system: bandwidths must be positive");
  if (!(s.bw_hbm > s.bw_uvm))
    throw InvalidArgument("system: bw_hbm must exceed bw_uvm");
}

/// Ablation toggles: a disabled statistic is replaced by 1 in the planner
/// cost model.
struct Ablation {
  bool use_pooling = true;
  bool use_coverage = true;
};

const char* to_string(const Ablation& a);
Ablation ablation_from_string(const std::string& s);

}  // namespace shardplan

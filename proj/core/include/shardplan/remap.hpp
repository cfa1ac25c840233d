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

#include "shardplan/plan.hpp"

namespace shardplan {

enum class Tier { kFast, kSlow };

/// Translates original row indices to (tier, offset). Entry >= 0 encodes a
/// fast-tier offset; entry < 0 encodes slow-tier offset -entry - 1. Storage
/// is 4 bytes per row.
struct RemapTable {
  uint32_t table_id = 0;
  uint64_t hash_size = 0;
  uint64_t hbm_rows = 0;
  // Slow-tier rows that actually need backing store; smaller than
  // hash_size - hbm_rows when never-accessed rows are left unallocated.
  uint64_t slow_rows_allocated = 0;
  std::vector<int32_t> entries;

  uint64_t serialized_bytes() const { return kHeaderBytes + 4 * hash_size; }
  static constexpr uint64_t kHeaderBytes = 4 + 1 + 3 * 8;
};

struct RemapOptions {
  // When set, rows never observed in the profile are packed after the
  // accessed slow-tier rows and excluded from slow_rows_allocated, so the
  // slow tier only reserves space for rows that can actually be touched.
  bool omit_unaccessed = false;
};

/// Builds the remap for one table: the plan's hbm_rows highest-ranked rows
/// map to the fast tier in rank order; all remaining rows map to the slow
/// tier in ascending original-index order. `stats` must carry rows_by_rank
/// (i.e. come from profile(), not from a stats file).
RemapTable build_remap(const PlanEntry& entry, const FeatureStats& stats,
                       const TableSpec& spec, const RemapOptions& opts = {});

std::pair<Tier, uint64_t> translate(const RemapTable& remap,
                                    uint64_t original_index);

// Binary file: magic "SPRM", version byte, table_id u64, hash_size u64,
// hbm_rows u64, then hash_size little-endian int32 entries.
void write_remap(const RemapTable& remap, const std::string& path);
RemapTable read_remap(const std::string& path);

}  // namespace shardplan

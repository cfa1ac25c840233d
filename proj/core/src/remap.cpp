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

#include "shardplan/remap.hpp"

#include <cstdio>
#include <cstring>
#include <limits>

namespace shardplan {

namespace {

constexpr int32_t kUnset = std::numeric_limits<int32_t>::min();
constexpr char kMagic[4] = {'S', 'P', 'R', 'M'};

void put_u64(std::vector<unsigned char>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

uint64_t get_u64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t{p[i]} << (8 * i);
  return v;
}

}  // namespace

RemapTable build_remap(const PlanEntry& entry, const FeatureStats& stats,
                       const TableSpec& spec, const RemapOptions& opts) {
  if (spec.hash_size > kMaxHashSize)
    throw InvalidArgument(
        strfmt("table %u: hash_size %llu exceeds the 2^31-1 limit of the "
               "signed 32-bit remap encoding",
               spec.table_id, (unsigned long long)spec.hash_size));
  if (entry.hbm_rows > spec.hash_size)
    throw InvalidArgument(
        strfmt("table %u: hbm_rows %llu exceeds hash_size %llu", spec.table_id,
               (unsigned long long)entry.hbm_rows,
               (unsigned long long)spec.hash_size));
  if (stats.rows_by_rank.size() != stats.distinct_rows_accessed)
    throw InvalidArgument(
        strfmt("table %u: stats lack row-level ranking (loaded from a stats "
               "file?); re-profile the trace",
               spec.table_id));

  RemapTable remap;
  remap.table_id = spec.table_id;
  remap.hash_size = spec.hash_size;
  remap.hbm_rows = entry.hbm_rows;
  remap.entries.assign(spec.hash_size, kUnset);

  // Fast tier: ranked rows first, then (only when hbm_rows exceeds the
  // accessed count, e.g. whole-table baseline placements) never-accessed
  // rows in ascending index order.
  uint64_t ranked_in_fast =
      std::min<uint64_t>(entry.hbm_rows, stats.rows_by_rank.size());
  for (uint64_t r = 0; r < ranked_in_fast; ++r)
    remap.entries[stats.rows_by_rank[r]] = static_cast<int32_t>(r);
  uint64_t fast_next = ranked_in_fast;
  if (fast_next < entry.hbm_rows) {
    for (uint64_t row = 0; row < spec.hash_size && fast_next < entry.hbm_rows;
         ++row) {
      if (remap.entries[row] == kUnset)
        remap.entries[row] = static_cast<int32_t>(fast_next++);
    }
  }

  // Slow tier. Default: remaining rows in ascending index order. With
  // omit_unaccessed, accessed rows pack first (still in index order) so the
  // allocated prefix covers everything that can be touched; never-accessed
  // rows take offsets past slow_rows_allocated and need no backing store.
  uint64_t slow_next = 0;
  if (opts.omit_unaccessed) {
    std::vector<bool> accessed(spec.hash_size, false);
    for (uint32_t row : stats.rows_by_rank) accessed[row] = true;
    for (uint64_t row = 0; row < spec.hash_size; ++row) {
      if (remap.entries[row] == kUnset && accessed[row])
        remap.entries[row] = static_cast<int32_t>(-(int64_t)(slow_next++) - 1);
    }
    remap.slow_rows_allocated = slow_next;
    for (uint64_t row = 0; row < spec.hash_size; ++row) {
      if (remap.entries[row] == kUnset)
        remap.entries[row] = static_cast<int32_t>(-(int64_t)(slow_next++) - 1);
    }
  } else {
    for (uint64_t row = 0; row < spec.hash_size; ++row) {
      if (remap.entries[row] == kUnset)
        remap.entries[row] = static_cast<int32_t>(-(int64_t)(slow_next++) - 1);
    }
    remap.slow_rows_allocated = slow_next;
  }
  return remap;
}

std::pair<Tier, uint64_t> translate(const RemapTable& remap,
                                    uint64_t original_index) {
  if (original_index >= remap.hash_size)
    throw InvalidArgument(
        strfmt("translate: index %llu out of range for table %u",
               (unsigned long long)original_index, remap.table_id));
  int32_t v = remap.entries[original_index];
  if (v >= 0) return {Tier::kFast, static_cast<uint64_t>(v)};
  return {Tier::kSlow, static_cast<uint64_t>(-(int64_t)v - 1)};
}

void write_remap(const RemapTable& remap, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::vector<unsigned char> header;
  header.insert(header.end(), kMagic, kMagic + 4);
  header.push_back(1);  // version
  put_u64(header, remap.table_id);
  put_u64(header, remap.hash_size);
  put_u64(header, remap.hbm_rows);
  bool ok = std::fwrite(header.data(), 1, header.size(), f) == header.size();
  if (ok) {
    std::vector<unsigned char> buf;
    buf.reserve(remap.entries.size() * 4);
    for (int32_t v : remap.entries) {
      uint32_t u = static_cast<uint32_t>(v);
      for (int i = 0; i < 4; ++i) buf.push_back((u >> (8 * i)) & 0xFF);
    }
    ok = std::fwrite(buf.data(), 1, buf.size(), f) == buf.size();
  }
  if (std::fclose(f) != 0 || !ok) throw IoError("write failed: " + path);
}

RemapTable read_remap(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open: " + path);
  unsigned char header[RemapTable::kHeaderBytes];
  if (std::fread(header, 1, sizeof header, f) != sizeof header) {
    std::fclose(f);
    throw ParseError("remap file too short: " + path);
  }
  if (std::memcmp(header, kMagic, 4) != 0 || header[4] != 1) {
    std::fclose(f);
    throw ParseError("bad remap magic or version: " + path);
  }
  RemapTable remap;
  remap.table_id = static_cast<uint32_t>(get_u64(header + 5));
  remap.hash_size = get_u64(header + 13);
  remap.hbm_rows = get_u64(header + 21);
  if (remap.hash_size > kMaxHashSize) {
    std::fclose(f);
    throw ParseError("remap hash_size out of range: " + path);
  }
  std::vector<unsigned char> buf(remap.hash_size * 4);
  if (std::fread(buf.data(), 1, buf.size(), f) != buf.size()) {
    std::fclose(f);
    throw ParseError("remap file truncated: " + path);
  }
  std::fclose(f);
  remap.entries.resize(remap.hash_size);
  uint64_t slow = 0;
  for (uint64_t i = 0; i < remap.hash_size; ++i) {
    uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= uint32_t{buf[i * 4 + b]} << (8 * b);
    remap.entries[i] = static_cast<int32_t>(u);
    if (remap.entries[i] < 0) ++slow;
  }
  remap.slow_rows_allocated = slow;
  return remap;
}

}  // namespace shardplan

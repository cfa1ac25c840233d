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

#include "shardplan/profiler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_map>

#include "shardplan/line_io.hpp"

namespace shardplan {

namespace {

// Stream tag separating profile sampling from other derived streams.
constexpr uint64_t kProfileStream = 0x70726f66;  // "prof"

std::vector<uint64_t> icdf_from_sorted(std::span<const uint64_t> sorted_desc,
                                       uint64_t total) {
  std::vector<uint64_t> icdf(kIcdfPercentSteps + 1, 0);
  // Integer arithmetic: top-k rows cover i% iff 100 * prefix(k) >= i * total.
  uint64_t prefix = 0;
  size_t k = 0;
  for (int i = 1; i <= kIcdfPercentSteps; ++i) {
    while (prefix * 100 < static_cast<uint64_t>(i) * total) {
      prefix += sorted_desc[k];
      ++k;
    }
    icdf[i] = k;
  }
  return icdf;
}

}  // namespace

std::vector<uint64_t> build_icdf(std::span<const uint64_t> counts_per_row) {
  uint64_t total = 0;
  for (uint64_t c : counts_per_row) total += c;
  if (total == 0)
    throw InvalidArgument("build_icdf: all access counts are zero");
  std::vector<uint64_t> sorted(counts_per_row.begin(), counts_per_row.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  while (!sorted.empty() && sorted.back() == 0) sorted.pop_back();
  return icdf_from_sorted(sorted, total);
}

std::vector<FeatureStats> profile(const Trace& trace, double sample_rate,
                                  uint64_t seed) {
  if (trace.num_samples < 1 || trace.tables.empty())
    throw InvalidArgument("profile: trace is empty");
  if (!(sample_rate > 0.0 && sample_rate <= 1.0))
    throw InvalidArgument("profile: sample_rate must be in (0, 1]");

  // Whole-sample selection keeps pooling and coverage estimates unbiased.
  std::vector<bool> selected(trace.num_samples);
  uint64_t selected_count = 0;
  for (uint64_t s = 0; s < trace.num_samples; ++s) {
    SplitMix64 rng(derive_stream(seed, s, kProfileStream));
    selected[s] = sample_rate >= 1.0 || rng.next_double() < sample_rate;
    selected_count += selected[s];
  }
  if (selected_count == 0)
    throw InvalidArgument("profile: sample selected zero samples");

  std::vector<FeatureStats> out(trace.tables.size());
  std::unordered_map<uint32_t, size_t> index_of;
  for (size_t j = 0; j < trace.tables.size(); ++j) {
    out[j].table_id = trace.tables[j].table_id;
    index_of[trace.tables[j].table_id] = j;
  }

  std::vector<uint64_t> present(trace.tables.size(), 0);
  std::vector<uint64_t> accesses(trace.tables.size(), 0);

  // Row counts: dense per table while tables are processed one at a time
  // would need a second pass over records; instead accumulate per table in
  // dense arrays sized by hash_size, falling back to a map for very large
  // sparse tables.
  constexpr uint64_t kDenseLimit = 1ULL << 23;  // 64 MiB of counters per table
  std::vector<std::vector<uint64_t>> dense(trace.tables.size());
  std::vector<std::unordered_map<uint32_t, uint64_t>> sparse(
      trace.tables.size());
  for (size_t j = 0; j < trace.tables.size(); ++j) {
    if (trace.tables[j].hash_size <= kDenseLimit)
      dense[j].assign(trace.tables[j].hash_size, 0);
  }

  for (const auto& rec : trace.records) {
    if (!selected[rec.sample]) continue;
    size_t j = index_of.at(rec.table);
    present[j] += 1;
    accesses[j] += rec.len;
    auto ids = trace.record_ids(rec);
    if (!dense[j].empty()) {
      for (uint32_t id : ids) dense[j][id] += 1;
    } else {
      for (uint32_t id : ids) sparse[j][id] += 1;
    }
  }

  for (size_t j = 0; j < trace.tables.size(); ++j) {
    auto& st = out[j];
    st.coverage = static_cast<double>(present[j]) /
                  static_cast<double>(selected_count);
    st.avg_pooling = present[j] ? static_cast<double>(accesses[j]) /
                                      static_cast<double>(present[j])
                                : 0.0;
    st.total_accesses = accesses[j];

    // (count, row) pairs of accessed rows, sorted by count desc, row asc.
    std::vector<std::pair<uint64_t, uint32_t>> ranked;
    if (!dense[j].empty()) {
      for (uint64_t row = 0; row < dense[j].size(); ++row)
        if (dense[j][row]) ranked.emplace_back(dense[j][row],
                                               static_cast<uint32_t>(row));
      dense[j].clear();
      dense[j].shrink_to_fit();
    } else {
      ranked.reserve(sparse[j].size());
      for (auto [row, c] : sparse[j]) ranked.emplace_back(c, row);
      sparse[j].clear();
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    st.distinct_rows_accessed = ranked.size();

    st.rows_by_rank.resize(ranked.size());
    st.access_cdf.resize(ranked.size());
    std::vector<uint64_t> sorted_counts(ranked.size());
    uint64_t cum = 0;
    for (size_t r = 0; r < ranked.size(); ++r) {
      sorted_counts[r] = ranked[r].first;
      st.rows_by_rank[r] = ranked[r].second;
      cum += ranked[r].first;
      st.access_cdf[r] =
          static_cast<double>(cum) / static_cast<double>(st.total_accesses);
    }

    if (st.total_accesses == 0) {
      st.icdf_steps.assign(kIcdfPercentSteps + 1, 0);
    } else {
      st.icdf_steps = icdf_from_sorted(sorted_counts, st.total_accesses);
    }
  }
  return out;
}

std::pair<double, double> hash_utilization(const FeatureStats& stats,
                                           const TableSpec& spec,
                                           uint64_t distinct_raw_ids_seen) {
  double h = static_cast<double>(spec.hash_size);
  double sparsity =
      static_cast<double>(spec.hash_size - stats.distinct_rows_accessed) / h;
  double collisions =
      (static_cast<double>(distinct_raw_ids_seen) -
       static_cast<double>(stats.distinct_rows_accessed)) /
      h;
  return {sparsity, collisions};
}

void write_stats(const std::vector<FeatureStats>& stats,
                 const std::string& path,
                 const std::vector<std::string>& comments) {
  LineWriter w(path);
  w.write_line(strfmt("#shardplan-stats v1 tables=%zu", stats.size()));
  for (const auto& c : comments) w.write_line("# " + c);
  for (const auto& st : stats) {
    w.write_line(strfmt("table %u", st.table_id));
    w.write_line(strfmt("coverage %.17g", st.coverage));
    w.write_line(strfmt("avg_pooling %.17g", st.avg_pooling));
    w.write_line(strfmt("distinct_rows_accessed %llu",
                        (unsigned long long)st.distinct_rows_accessed));
    w.write_line(
        strfmt("total_accesses %llu", (unsigned long long)st.total_accesses));
    std::string line = "icdf ";
    for (size_t i = 0; i < st.icdf_steps.size(); ++i) {
      if (i) line += ',';
      line += strfmt("%llu", (unsigned long long)st.icdf_steps[i]);
    }
    w.write_line(line);
    w.write_line("end");
  }
  w.close();
}

std::vector<FeatureStats> read_stats(const std::string& path) {
  LineReader r(path);
  std::string line;
  if (!r.next_line(line) || line.rfind("#shardplan-stats v1", 0) != 0)
    throw ParseError("bad stats header", 1);

  std::vector<FeatureStats> out;
  FeatureStats cur;
  bool in_table = false;
  while (r.next_line(line)) {
    size_t ln = r.line_number();
    if (line.empty() || line[0] == '#') continue;
    size_t sp = line.find(' ');
    std::string key = line.substr(0, sp);
    std::string val = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (key == "table") {
      if (in_table) throw ParseError("nested table block", ln);
      in_table = true;
      cur = FeatureStats{};
      cur.table_id = static_cast<uint32_t>(std::stoull(val));
    } else if (key == "end") {
      if (!in_table) throw ParseError("stray end", ln);
      if (cur.icdf_steps.size() != kIcdfPercentSteps + 1)
        throw ParseError("missing or short icdf array", ln);
      out.push_back(std::move(cur));
      in_table = false;
    } else if (!in_table) {
      throw ParseError("field outside table block: " + key, ln);
    } else if (key == "coverage") {
      cur.coverage = std::stod(val);
    } else if (key == "avg_pooling") {
      cur.avg_pooling = std::stod(val);
    } else if (key == "distinct_rows_accessed") {
      cur.distinct_rows_accessed = std::stoull(val);
    } else if (key == "total_accesses") {
      cur.total_accesses = std::stoull(val);
    } else if (key == "icdf") {
      const char* p = val.data();
      const char* end = val.data() + val.size();
      while (p < end) {
        uint64_t v = 0;
        auto [q, ec] = std::from_chars(p, end, v);
        if (ec != std::errc()) throw ParseError("bad icdf entry", ln);
        cur.icdf_steps.push_back(v);
        p = q < end && *q == ',' ? q + 1 : q;
      }
    } else {
      throw ParseError("unknown stats field: " + key, ln);
    }
  }
  if (in_table) throw ParseError("unterminated table block");
  return out;
}

}  // namespace shardplan

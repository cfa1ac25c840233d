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

#include "shardplan/trace_io.hpp"

#include <charconv>
#include <unordered_map>

#include "shardplan/line_io.hpp"

namespace shardplan {
namespace {

uint64_t parse_u64(std::string_view tok, size_t line, const char* what) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError(strfmt("bad %s: '%.*s'", what, (int)tok.size(), tok.data()),
                     line);
  return v;
}

// Splits on single spaces; empty fields are malformed.
std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

void write_trace(const Trace& trace, const std::string& path,
                 const std::vector<std::string>& comments) {
  LineWriter w(path);
  w.write_line(strfmt("#shardplan-trace v1 tables=%zu samples=%llu",
                      trace.tables.size(),
                      (unsigned long long)trace.num_samples));
  for (const auto& c : comments) w.write_line("# " + c);
  for (const auto& t : trace.tables) {
    w.write_line(strfmt("T %u %llu %llu %u %u", t.table_id,
                        (unsigned long long)t.cardinality,
                        (unsigned long long)t.hash_size, t.dim, t.elem_bytes));
  }
  std::string line;
  for (const auto& r : trace.records) {
    line.clear();
    line += strfmt("R %llu %u ", (unsigned long long)r.sample, r.table);
    auto ids = trace.record_ids(r);
    for (size_t i = 0; i < ids.size(); ++i) {
      if (i) line += ',';
      line += strfmt("%u", ids[i]);
    }
    w.write_line(line);
  }
  w.close();
}

Trace read_trace(const std::string& path) {
  LineReader r(path);
  std::string line;
  if (!r.next_line(line)) throw ParseError("empty trace file", 1);

  Trace trace;
  size_t expect_tables = 0;
  {
    auto toks = split(line, ' ');
    if (toks.size() != 4 || toks[0] != "#shardplan-trace" || toks[1] != "v1" ||
        toks[2].substr(0, 7) != "tables=" || toks[3].substr(0, 8) != "samples=")
      throw ParseError("bad trace header: " + line, 1);
    expect_tables = parse_u64(toks[2].substr(7), 1, "table count");
    trace.num_samples = parse_u64(toks[3].substr(8), 1, "sample count");
    trace.tables.reserve(expect_tables);
  }
  std::unordered_map<uint32_t, uint64_t> hash_size_of;
  bool have_prev = false;
  uint64_t prev_sample = 0;
  uint32_t prev_table = 0;

  while (r.next_line(line)) {
    size_t ln = r.line_number();
    if (line.empty() || line[0] == '#') continue;
    auto toks = split(line, ' ');
    if (toks[0] == "T") {
      if (toks.size() != 6) throw ParseError("malformed table line", ln);
      TableSpec t;
      t.table_id = static_cast<uint32_t>(parse_u64(toks[1], ln, "table_id"));
      t.cardinality = parse_u64(toks[2], ln, "cardinality");
      t.hash_size = parse_u64(toks[3], ln, "hash_size");
      t.dim = static_cast<uint32_t>(parse_u64(toks[4], ln, "dim"));
      t.elem_bytes = static_cast<uint32_t>(parse_u64(toks[5], ln, "elem_bytes"));
      validate(t);
      if (hash_size_of.count(t.table_id))
        throw InvalidArgument(
            strfmt("line %zu: duplicate table %u", ln, t.table_id));
      hash_size_of[t.table_id] = t.hash_size;
      trace.tables.push_back(t);
    } else if (toks[0] == "R") {
      if (toks.size() != 4) throw ParseError("malformed record line", ln);
      Trace::Record rec;
      rec.sample = parse_u64(toks[1], ln, "sample_id");
      rec.table = static_cast<uint32_t>(parse_u64(toks[2], ln, "table_id"));
      auto it = hash_size_of.find(rec.table);
      if (it == hash_size_of.end())
        throw InvalidArgument(
            strfmt("line %zu: record references table %u not in header", ln,
                   rec.table));
      if (rec.sample >= trace.num_samples)
        throw InvalidArgument(
            strfmt("line %zu: sample_id %llu out of range", ln,
                   (unsigned long long)rec.sample));
      if (have_prev && (rec.sample < prev_sample ||
                        (rec.sample == prev_sample && rec.table <= prev_table)))
        throw InvalidArgument(
            strfmt("line %zu: records not sorted by (sample, table)", ln));
      have_prev = true;
      prev_sample = rec.sample;
      prev_table = rec.table;
      rec.offset = trace.ids.size();
      auto id_toks = split(toks[3], ',');
      if (id_toks.size() == 1 && id_toks[0].empty())
        throw ParseError("empty id list", ln);
      for (auto tok : id_toks) {
        uint64_t id = parse_u64(tok, ln, "hashed id");
        if (id >= it->second)
          throw InvalidArgument(
              strfmt("line %zu: id %llu out of range for table %u", ln,
                     (unsigned long long)id, rec.table));
        trace.ids.push_back(static_cast<uint32_t>(id));
      }
      rec.len = static_cast<uint32_t>(id_toks.size());
      trace.records.push_back(rec);
    } else {
      throw ParseError("unknown line tag: " + std::string(toks[0]), ln);
    }
  }

  if (trace.tables.size() != expect_tables)
    throw ParseError(strfmt("header announced %zu tables, found %zu",
                            expect_tables, trace.tables.size()));
  return trace;
}

}  // namespace shardplan

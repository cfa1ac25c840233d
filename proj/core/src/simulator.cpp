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

#include "shardplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "shardplan/line_io.hpp"

namespace shardplan {

SimReport simulate(const Trace& trace, const ShardingPlan& plan,
                   const std::vector<RemapTable>& remaps,
                   const SystemSpec& system, uint64_t batch_size) {
  validate(system);
  if (batch_size < 1) throw InvalidArgument("simulate: batch_size must be >= 1");
  uint64_t batches = trace.num_samples / batch_size;
  if (batches == 0)
    throw InvalidArgument(
        "simulate: trace holds fewer samples than one batch");

  std::unordered_map<uint32_t, const PlanEntry*> entry_of;
  for (const auto& e : plan.entries) entry_of[e.table_id] = &e;
  std::unordered_map<uint32_t, const RemapTable*> remap_of;
  for (const auto& r : remaps) remap_of[r.table_id] = &r;

  struct Route {
    uint32_t gpu;
    const RemapTable* remap;
    double row_bytes;
  };
  std::unordered_map<uint32_t, Route> route_of;
  std::unordered_map<uint32_t, size_t> table_pos;
  for (size_t j = 0; j < trace.tables.size(); ++j) {
    const TableSpec& t = trace.tables[j];
    auto eit = entry_of.find(t.table_id);
    if (eit == entry_of.end())
      throw InvalidArgument(
          strfmt("simulate: trace table %u missing from plan", t.table_id));
    auto rit = remap_of.find(t.table_id);
    if (rit == remap_of.end())
      throw InvalidArgument(
          strfmt("simulate: no remap for table %u", t.table_id));
    if (rit->second->hash_size != t.hash_size)
      throw InvalidArgument(
          strfmt("simulate: remap for table %u sized %llu, trace says %llu",
                 t.table_id, (unsigned long long)rit->second->hash_size,
                 (unsigned long long)t.hash_size));
    if (eit->second->gpu >= system.num_gpus)
      throw InvalidArgument(
          strfmt("simulate: table %u assigned to gpu %u outside system",
                 t.table_id, eit->second->gpu));
    route_of[t.table_id] = {eit->second->gpu, rit->second,
                            static_cast<double>(t.dim) * t.elem_bytes};
    table_pos[t.table_id] = j;
  }

  uint64_t sample_limit = batches * batch_size;
  std::vector<uint64_t> hbm_count(system.num_gpus, 0),
      uvm_count(system.num_gpus, 0);
  std::vector<double> hbm_bytes(system.num_gpus, 0.0),
      uvm_bytes(system.num_gpus, 0.0);
  std::vector<uint64_t> table_fast(trace.tables.size(), 0),
      table_total(trace.tables.size(), 0);

  for (const auto& rec : trace.records) {
    if (rec.sample >= sample_limit) continue;
    const Route& route = route_of.at(rec.table);
    size_t pos = table_pos.at(rec.table);
    uint64_t fast = 0;
    const auto& entries = route.remap->entries;
    for (uint32_t id : trace.record_ids(rec)) fast += entries[id] >= 0;
    uint64_t slow = rec.len - fast;
    hbm_count[route.gpu] += fast;
    uvm_count[route.gpu] += slow;
    hbm_bytes[route.gpu] += static_cast<double>(fast) * route.row_bytes;
    uvm_bytes[route.gpu] += static_cast<double>(slow) * route.row_bytes;
    table_fast[pos] += fast;
    table_total[pos] += rec.len;
  }

  SimReport report;
  report.batches = batches;
  report.gpus.resize(system.num_gpus);
  uint64_t total_hbm = 0, total_uvm = 0;
  double bi = static_cast<double>(batches);
  for (uint32_t g = 0; g < system.num_gpus; ++g) {
    auto& out = report.gpus[g];
    out.hbm_accesses = static_cast<double>(hbm_count[g]) / bi;
    out.uvm_accesses = static_cast<double>(uvm_count[g]) / bi;
    out.est_iter_cost =
        (hbm_bytes[g] / system.bw_hbm + uvm_bytes[g] / system.bw_uvm) / bi;
    total_hbm += hbm_count[g];
    total_uvm += uvm_count[g];
  }
  report.total_accesses = total_hbm + total_uvm;
  report.uvm_access_fraction =
      report.total_accesses
          ? static_cast<double>(total_uvm) / report.total_accesses
          : 0.0;

  double mn = std::numeric_limits<double>::max(), mx = 0.0, sum = 0.0;
  for (const auto& g : report.gpus) {
    mn = std::min(mn, g.est_iter_cost);
    mx = std::max(mx, g.est_iter_cost);
    sum += g.est_iter_cost;
  }
  report.min_cost = mn;
  report.max_cost = mx;
  report.mean_cost = sum / report.gpus.size();
  double var = 0.0;
  for (const auto& g : report.gpus) {
    double d = g.est_iter_cost - report.mean_cost;
    var += d * d;
  }
  report.stddev_cost = std::sqrt(var / report.gpus.size());

  report.table_fast_fraction.resize(trace.tables.size());
  for (size_t j = 0; j < trace.tables.size(); ++j) {
    report.table_fast_fraction[j] =
        table_total[j] ? static_cast<double>(table_fast[j]) / table_total[j]
                       : std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

PlanOverlap compare_plans(const ShardingPlan& plan_a, const ShardingPlan& plan_b,
                          const std::vector<TableSpec>& specs) {
  std::unordered_map<uint32_t, const PlanEntry*> a_of, b_of;
  for (const auto& e : plan_a.entries) a_of[e.table_id] = &e;
  for (const auto& e : plan_b.entries) b_of[e.table_id] = &e;

  // Fast tiers are prefixes of the shared frequency ranking, so per-table
  // set intersections reduce to cutoff arithmetic.
  uint64_t b_uvm_rows = 0, b_hbm_rows = 0;
  uint64_t uvm_to_hbm = 0, hbm_to_uvm = 0;
  for (const auto& spec : specs) {
    auto ai = a_of.find(spec.table_id);
    auto bi = b_of.find(spec.table_id);
    if (ai == a_of.end() || bi == b_of.end())
      throw InvalidArgument(
          strfmt("compare_plans: table %u missing from a plan", spec.table_id));
    uint64_t ka = std::min(ai->second->hbm_rows, spec.hash_size);
    uint64_t kb = std::min(bi->second->hbm_rows, spec.hash_size);
    b_uvm_rows += spec.hash_size - kb;
    b_hbm_rows += kb;
    uvm_to_hbm += ka > kb ? ka - kb : 0;
    hbm_to_uvm += kb > ka ? kb - ka : 0;
  }
  PlanOverlap out;
  out.uvm_to_hbm =
      b_uvm_rows ? static_cast<double>(uvm_to_hbm) / b_uvm_rows : 0.0;
  out.hbm_to_uvm =
      b_hbm_rows ? static_cast<double>(hbm_to_uvm) / b_hbm_rows : 0.0;
  return out;
}

double amdahl_speedup(double p, double s) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidArgument("amdahl_speedup: p must be in [0, 1]");
  if (!(s > 0.0)) throw InvalidArgument("amdahl_speedup: s must be positive");
  return 1.0 / ((1.0 - p) + p / s);
}

std::string format_report(const SimReport& report, const std::string& label) {
  std::string out;
  out += strfmt("strategy: %s   batches: %llu   accesses/iter: %.0f\n",
                label.c_str(), (unsigned long long)report.batches,
                static_cast<double>(report.total_accesses) / report.batches);
  out += strfmt("%-5s %18s %18s %16s\n", "gpu", "hbm_accesses/iter",
                "uvm_accesses/iter", "est_iter_cost_s");
  for (size_t g = 0; g < report.gpus.size(); ++g) {
    const auto& gr = report.gpus[g];
    out += strfmt("%-5zu %18.1f %18.1f %16.6e\n", g, gr.hbm_accesses,
                  gr.uvm_accesses, gr.est_iter_cost);
  }
  out += strfmt("iter cost min/max/mean/stddev: %.6e / %.6e / %.6e / %.6e\n",
                report.min_cost, report.max_cost, report.mean_cost,
                report.stddev_cost);
  out += strfmt("uvm access fraction: %.6f\n", report.uvm_access_fraction);
  return out;
}

void write_report_csv(const SimReport& report, const std::string& path,
                      const std::vector<std::string>& comments) {
  LineWriter w(path);
  for (const auto& c : comments) w.write_line("# " + c);
  w.write_line("gpu,hbm_accesses,uvm_accesses,est_iter_cost_s");
  for (size_t g = 0; g < report.gpus.size(); ++g) {
    const auto& gr = report.gpus[g];
    w.write_line(strfmt("%zu,%.17g,%.17g,%.17g", g, gr.hbm_accesses,
                        gr.uvm_accesses, gr.est_iter_cost));
  }
  w.close();
}

}  // namespace shardplan

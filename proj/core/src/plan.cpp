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

#include "shardplan/plan.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "shardplan/line_io.hpp"

namespace shardplan {

double table_cost(const TableSpec& spec, const FeatureStats& stats, double pct,
                  const SystemSpec& system, const Ablation& ablation) {
  if (!(pct >= 0.0 && pct <= 1.0))
    throw InvalidArgument("table_cost: pct must be in [0, 1]");
  double pool = ablation.use_pooling ? stats.avg_pooling : 1.0;
  double demand = pool * spec.dim * spec.elem_bytes *
                  static_cast<double>(system.batch_size);
  return demand * (pct / system.bw_hbm + (1.0 - pct) / system.bw_uvm);
}

uint64_t rows_at_step(const std::vector<uint64_t>& icdf_steps, uint32_t step,
                      uint32_t step_count) {
  if (step > step_count)
    throw InvalidArgument("rows_at_step: step exceeds step_count");
  // Percent index covering at least step/step_count of accesses.
  uint64_t pidx = (static_cast<uint64_t>(step) * kIcdfPercentSteps +
                   step_count - 1) /
                  step_count;
  return icdf_steps.at(pidx);
}

void recompute_plan_costs(ShardingPlan& plan, const MilpInstance& instance) {
  std::unordered_map<uint32_t, const MilpTable*> by_id;
  for (const auto& t : instance.tables) by_id[t.spec.table_id] = &t;
  plan.gpu_cost.assign(instance.system.num_gpus, 0.0);
  for (const auto& e : plan.entries) {
    auto it = by_id.find(e.table_id);
    if (it == by_id.end())
      throw InvalidArgument(
          strfmt("plan entry for table %u not in instance", e.table_id));
    const MilpTable& t = *it->second;
    double w = instance.ablation.use_coverage ? t.stats.coverage : 1.0;
    plan.gpu_cost.at(e.gpu) +=
        w * table_cost(t.spec, t.stats, e.pct, instance.system,
                       instance.ablation);
  }
  plan.objective = 0.0;
  for (double c : plan.gpu_cost) plan.objective = std::max(plan.objective, c);
}

std::optional<std::string> check_plan(const ShardingPlan& plan,
                                      const MilpInstance& instance) {
  const auto& sys = instance.system;
  if (plan.entries.size() != instance.tables.size())
    return strfmt("plan has %zu entries for %zu tables", plan.entries.size(),
                  instance.tables.size());

  std::unordered_map<uint32_t, const PlanEntry*> entry_of;
  for (const auto& e : plan.entries) {
    if (!entry_of.emplace(e.table_id, &e).second)
      return strfmt("table %u assigned more than once (constraint: one GPU "
                    "per table)",
                    e.table_id);
  }

  std::vector<double> hbm_used(sys.num_gpus, 0.0), uvm_used(sys.num_gpus, 0.0);
  for (const auto& t : instance.tables) {
    auto it = entry_of.find(t.spec.table_id);
    if (it == entry_of.end())
      return strfmt("table %u missing from plan", t.spec.table_id);
    const PlanEntry& e = *it->second;
    if (e.gpu >= sys.num_gpus)
      return strfmt("table %u assigned to gpu %u of %u", e.table_id, e.gpu,
                    sys.num_gpus);
    if (e.hbm_rows > t.spec.hash_size)
      return strfmt("table %u: hbm_rows exceeds hash_size", e.table_id);
    uint64_t expect_mem =
        e.hbm_rows * t.spec.dim * t.spec.elem_bytes;
    if (e.mem_bytes != expect_mem)
      return strfmt("table %u: mem_bytes %llu != hbm_rows*dim*bytes %llu",
                    e.table_id, (unsigned long long)e.mem_bytes,
                    (unsigned long long)expect_mem);
    if (plan.strategy == "milp") {
      if (plan.step_count == 0 || e.step > plan.step_count)
        return strfmt("table %u: step %u outside step grid", e.table_id,
                      e.step);
      uint64_t rows =
          rows_at_step(t.stats.icdf_steps, e.step, plan.step_count);
      if (rows != e.hbm_rows)
        return strfmt("table %u: hbm_rows %llu does not match ICDF step %u "
                      "(%llu rows)",
                      e.table_id, (unsigned long long)e.hbm_rows, e.step,
                      (unsigned long long)rows);
      double pct = static_cast<double>(e.step) / plan.step_count;
      if (std::fabs(pct - e.pct) > 1e-12)
        return strfmt("table %u: pct %.17g does not match step %u", e.table_id,
                      e.pct, e.step);
    }
    hbm_used[e.gpu] += static_cast<double>(e.mem_bytes);
    uvm_used[e.gpu] += static_cast<double>(t.spec.bytes() - e.mem_bytes);
  }

  for (uint32_t m = 0; m < sys.num_gpus; ++m) {
    if (hbm_used[m] > static_cast<double>(sys.cap_hbm_bytes))
      return strfmt("gpu %u: fast-tier capacity exceeded (%.0f > %llu)", m,
                    hbm_used[m], (unsigned long long)sys.cap_hbm_bytes);
    if (uvm_used[m] > static_cast<double>(sys.cap_dram_bytes))
      return strfmt("gpu %u: slow-tier capacity exceeded (%.0f > %llu)", m,
                    uvm_used[m], (unsigned long long)sys.cap_dram_bytes);
  }

  // Objective consistency: recompute c_m from entries.
  ShardingPlan copy = plan;
  recompute_plan_costs(copy, instance);
  double tol = 1e-9 * std::max(1.0, std::fabs(copy.objective));
  if (std::fabs(copy.objective - plan.objective) > tol)
    return strfmt("objective %.17g not reproducible from entries (%.17g)",
                  plan.objective, copy.objective);
  for (uint32_t m = 0; m < sys.num_gpus; ++m) {
    if (std::fabs(copy.gpu_cost[m] - plan.gpu_cost[m]) >
        1e-9 * std::max(1.0, std::fabs(copy.gpu_cost[m])))
      return strfmt("gpu %u cost not reproducible from entries", m);
  }
  return std::nullopt;
}

void validate_plan(const ShardingPlan& plan, const MilpInstance& instance) {
  if (auto msg = check_plan(plan, instance))
    throw InvalidArgument("plan validation failed: " + *msg);
}

void write_plan(const ShardingPlan& plan, const std::string& path,
                const std::vector<std::string>& comments) {
  LineWriter w(path);
  w.write_line(strfmt("#shardplan-plan v1 strategy=%s step_count=%u tables=%zu "
                      "gpus=%zu",
                      plan.strategy.c_str(), plan.step_count,
                      plan.entries.size(), plan.gpu_cost.size()));
  for (const auto& c : comments) w.write_line("# " + c);
  for (const auto& e : plan.entries) {
    w.write_line(strfmt(
        "table %u gpu=%u step=%u hbm_rows=%llu pct=%.17g mem_bytes=%llu",
        e.table_id, e.gpu, e.step, (unsigned long long)e.hbm_rows, e.pct,
        (unsigned long long)e.mem_bytes));
  }
  for (size_t m = 0; m < plan.gpu_cost.size(); ++m)
    w.write_line(strfmt("gpu_cost %zu %.17g", m, plan.gpu_cost[m]));
  w.write_line(strfmt("objective %.17g", plan.objective));
  w.write_line(strfmt("lower_bound %.17g", plan.lower_bound));
  w.write_line(strfmt("proved_optimal %d", plan.proved_optimal ? 1 : 0));
  w.close();
}

ShardingPlan read_plan(const std::string& path) {
  LineReader r(path);
  std::string line;
  if (!r.next_line(line)) throw ParseError("empty plan file", 1);

  ShardingPlan plan;
  {
    auto fields = line;
    if (fields.rfind("#shardplan-plan v1 ", 0) != 0)
      throw ParseError("bad plan header", 1);
    size_t s = fields.find("strategy=");
    size_t c = fields.find("step_count=");
    if (s == std::string::npos || c == std::string::npos)
      throw ParseError("bad plan header", 1);
    plan.strategy = fields.substr(s + 9, fields.find(' ', s + 9) - s - 9);
    plan.step_count = static_cast<uint32_t>(
        std::stoul(fields.substr(c + 11)));
  }

  auto take = [](const std::string& tok, const char* key, size_t ln) {
    std::string prefix = std::string(key) + "=";
    if (tok.rfind(prefix, 0) != 0)
      throw ParseError(strfmt("expected %s=...", key), ln);
    return tok.substr(prefix.size());
  };

  while (r.next_line(line)) {
    size_t ln = r.line_number();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> toks;
    size_t start = 0;
    while (start < line.size()) {
      size_t end = line.find(' ', start);
      if (end == std::string::npos) end = line.size();
      toks.push_back(line.substr(start, end - start));
      start = end + 1;
    }
    if (toks[0] == "table") {
      if (toks.size() != 7) throw ParseError("malformed plan entry", ln);
      PlanEntry e;
      e.table_id = static_cast<uint32_t>(std::stoul(toks[1]));
      e.gpu = static_cast<uint32_t>(std::stoul(take(toks[2], "gpu", ln)));
      e.step = static_cast<uint32_t>(std::stoul(take(toks[3], "step", ln)));
      e.hbm_rows = std::stoull(take(toks[4], "hbm_rows", ln));
      e.pct = std::stod(take(toks[5], "pct", ln));
      e.mem_bytes = std::stoull(take(toks[6], "mem_bytes", ln));
      plan.entries.push_back(e);
    } else if (toks[0] == "gpu_cost") {
      if (toks.size() != 3) throw ParseError("malformed gpu_cost", ln);
      size_t m = std::stoull(toks[1]);
      if (plan.gpu_cost.size() <= m) plan.gpu_cost.resize(m + 1, 0.0);
      plan.gpu_cost[m] = std::stod(toks[2]);
    } else if (toks[0] == "objective") {
      plan.objective = std::stod(toks[1]);
    } else if (toks[0] == "lower_bound") {
      plan.lower_bound = std::stod(toks[1]);
    } else if (toks[0] == "proved_optimal") {
      plan.proved_optimal = toks[1] == "1";
    } else {
      throw ParseError("unknown plan line: " + toks[0], ln);
    }
  }
  return plan;
}

}  // namespace shardplan

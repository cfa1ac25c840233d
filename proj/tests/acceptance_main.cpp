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

// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// pass. Heavier end-to-end checks run on the bundled 1x/2x/4x workloads.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "oracles.hpp"
#include "shardplan/baselines.hpp"
#include "shardplan/config.hpp"
#include "shardplan/lp_format.hpp"
#include "shardplan/milp.hpp"
#include "shardplan/profiler.hpp"
#include "shardplan/remap.hpp"
#include "shardplan/simulator.hpp"

using namespace shardplan;
namespace fs = std::filesystem;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

struct ScaleResults {
  SystemSpec system;
  ShardingPlan milp_plan;
  SimReport milp_report;
  std::vector<std::pair<std::string, SimReport>> baseline_reports;
  // 4x only: simulated slow-tier accesses per iteration by ablation.
  std::vector<std::pair<std::string, double>> ablation_uvm;
};

std::vector<RemapTable> remaps_for(const ShardingPlan& plan,
                                   const std::vector<TableSpec>& specs,
                                   const std::vector<FeatureStats>& stats) {
  std::vector<RemapTable> remaps;
  for (size_t j = 0; j < specs.size(); ++j) {
    const PlanEntry* entry = nullptr;
    for (const auto& e : plan.entries)
      if (e.table_id == specs[j].table_id) entry = &e;
    remaps.push_back(build_remap(*entry, stats[j], specs[j]));
  }
  return remaps;
}

// Runs the full pipeline for one bundled scale: trace, profile, milp plan
// plus six baselines, simulations, and (optionally) the ablated planners.
ScaleResults run_scale(const RunConfig& cfg, bool with_ablations) {
  ScaleResults out;
  out.system = cfg.system;
  Trace trace =
      generate_trace(cfg.workload, cfg.num_samples, cfg.workload_seed);
  std::vector<TableSpec> specs = trace.tables;
  auto stats = profile(trace, 1.0, cfg.profile_seed);

  auto inst = build_instance(stats, specs, cfg.system, {}, cfg.step_count);
  out.milp_plan = solve(inst, cfg.time_limit_s);
  validate_plan(out.milp_plan, inst);
  {
    auto remaps = remaps_for(out.milp_plan, specs, stats);
    out.milp_report = simulate(trace, out.milp_plan, remaps, cfg.system,
                               cfg.system.batch_size);
  }

  for (CostKind kind :
       {CostKind::kSize, CostKind::kLookup, CostKind::kSizeAndLookup}) {
    std::vector<double> costs;
    for (size_t j = 0; j < specs.size(); ++j)
      costs.push_back(table_fixed_cost(specs[j], &stats[j], kind));
    for (bool use_ldm : {false, true}) {
      ShardingPlan plan = use_ldm
                              ? ldm_shard(costs, specs, stats, cfg.system)
                              : greedy_shard(costs, specs, stats, cfg.system);
      auto remaps = remaps_for(plan, specs, stats);
      std::string name =
          std::string(use_ldm ? "ldm-" : "greedy-") + to_string(kind);
      out.baseline_reports.emplace_back(
          name,
          simulate(trace, plan, remaps, cfg.system, cfg.system.batch_size));
    }
  }

  if (with_ablations) {
    std::vector<std::pair<std::string, Ablation>> ablations = {
        {"full", {true, true}},
        {"cdf+pooling", {true, false}},
        {"cdf+coverage", {false, true}},
        {"cdf", {false, false}}};
    for (const auto& [name, abl] : ablations) {
      auto abl_inst =
          build_instance(stats, specs, cfg.system, abl, cfg.step_count);
      auto plan = solve(abl_inst, cfg.time_limit_s);
      auto remaps = remaps_for(plan, specs, stats);
      auto report =
          simulate(trace, plan, remaps, cfg.system, cfg.system.batch_size);
      double uvm_per_iter = 0.0;
      for (const auto& g : report.gpus) uvm_per_iter += g.uvm_accesses;
      out.ablation_uvm.emplace_back(name, uvm_per_iter);
    }
  }
  return out;
}

struct Runner {
  int failures = 0;

  void check(int id, const std::string& name, bool pass,
             const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

}  // namespace

int main() {
  Runner runner;
  std::string cfg_dir = SHARDPLAN_CONFIG_DIR;

  // ---- 1. Solver equals exhaustive enumeration -------------------------
  {
    double t0 = now_s();
    int checked = 0;
    bool pass = true;
    std::string detail;
    for (uint64_t seed = 1; seed <= 200 && pass; ++seed) {
      auto inst = testing::random_instance(seed);
      auto want = testing::brute_force_solve(inst);
      auto plan = solve(inst);
      ++checked;
      double rel = std::fabs(plan.objective - want.objective) /
                   std::max(1e-300, std::fabs(want.objective));
      if (!want.feasible || !plan.proved_optimal || rel > 1e-9) {
        pass = false;
        detail = strfmt("instance seed %llu: solver %.12e vs oracle %.12e",
                        (unsigned long long)seed, plan.objective,
                        want.objective);
      }
    }
    double dt = now_s() - t0;
    if (pass && dt > 300.0) {
      pass = false;
      detail = strfmt("runtime %.1fs exceeds 300s", dt);
    }
    if (pass)
      detail = strfmt("%d instances, max rel err <= 1e-9, %.1fs", checked, dt);
    runner.check(1, "solver objective equals brute-force enumeration", pass,
                 detail);
  }

  // ---- 2. Independent constraint validator ------------------------------
  {
    bool pass = true;
    std::string detail = "300 plans across 100 instances all feasible";
    for (uint64_t seed = 1000; seed < 1100 && pass; ++seed) {
      auto inst = testing::random_instance(seed);
      std::vector<TableSpec> specs;
      std::vector<FeatureStats> stats;
      uint64_t biggest = 0;
      for (const auto& t : inst.tables) {
        specs.push_back(t.spec);
        stats.push_back(t.stats);
        biggest = std::max(biggest, t.spec.bytes());
      }
      inst.system.cap_hbm_bytes = std::max(inst.system.cap_hbm_bytes, biggest);
      CostKind kind = static_cast<CostKind>(seed % 3);
      std::vector<double> costs;
      for (size_t j = 0; j < specs.size(); ++j)
        costs.push_back(table_fixed_cost(specs[j], &stats[j], kind));

      auto milp_plan = solve(inst);
      auto g = greedy_shard(costs, specs, stats, inst.system);
      auto l = ldm_shard(costs, specs, stats, inst.system);
      MilpInstance whole = build_instance(stats, specs, inst.system, {}, 1);
      for (const auto* plan : {&milp_plan, &g, &l}) {
        auto bad = check_plan(*plan, plan == &milp_plan ? inst : whole);
        if (bad) {
          pass = false;
          detail = strfmt("seed %llu %s: %s", (unsigned long long)seed,
                          plan->strategy.c_str(), bad->c_str());
        }
      }
    }
    // Infeasible instances are rejected with the infeasibility error.
    if (pass) {
      TableSpec spec{0, 1000, 1000, 64, 4};
      FeatureStats st;
      st.table_id = 0;
      st.coverage = 1.0;
      st.avg_pooling = 4.0;
      st.distinct_rows_accessed = 900;
      st.total_accesses = 9000;
      st.icdf_steps.assign(101, 900);
      st.icdf_steps[0] = 0;
      SystemSpec sys;
      sys.num_gpus = 1;
      sys.batch_size = 64;
      sys.cap_hbm_bytes = 64;
      sys.cap_dram_bytes = 64;
      sys.bw_hbm = 1e12;
      sys.bw_uvm = 1e10;
      int rejected = 0;
      try {
        solve(build_instance({st}, {spec}, sys));
      } catch (const InfeasibleError&) {
        ++rejected;
      }
      try {
        greedy_shard({1.0}, {spec}, {st}, sys);
      } catch (const InfeasibleError&) {
        ++rejected;
      }
      try {
        ldm_shard({1.0}, {spec}, {st}, sys);
      } catch (const InfeasibleError&) {
        ++rejected;
      }
      if (rejected != 3) {
        pass = false;
        detail = strfmt("only %d/3 planners rejected the infeasible instance",
                        rejected);
      }
    }
    runner.check(2, "all planner outputs satisfy the placement constraints",
                 pass, detail);
  }

  // ---- Shared end-to-end runs on the bundled workloads ------------------
  double t_e2e = now_s();
  RunConfig cfg1 = parse_config(cfg_dir + std::string("/example_1x.cfg"));
  RunConfig cfg2 = parse_config(cfg_dir + std::string("/example_2x.cfg"));
  RunConfig cfg4 = parse_config(cfg_dir + std::string("/example_4x.cfg"));
  ScaleResults r1 = run_scale(cfg1, false);
  ScaleResults r2 = run_scale(cfg2, false);
  ScaleResults r4 = run_scale(cfg4, true);
  double e2e_runtime = now_s() - t_e2e;

  auto best_of = [](const ScaleResults& r, auto metric) {
    double best = std::numeric_limits<double>::max();
    for (const auto& [name, report] : r.baseline_reports)
      best = std::min(best, metric(report));
    return best;
  };

  // ---- 3. Directional reproduction on the capacity-constrained 2x ------
  {
    double best_max =
        best_of(r2, [](const SimReport& r) { return r.max_cost; });
    double best_uvm =
        best_of(r2, [](const SimReport& r) { return r.uvm_access_fraction; });
    double best_std =
        best_of(r2, [](const SimReport& r) { return r.stddev_cost; });
    bool a = r2.milp_report.max_cost * 2.0 <= best_max;
    bool b = r2.milp_report.uvm_access_fraction <= best_uvm / 10.0;
    bool c = r2.milp_report.stddev_cost * 3.0 <= best_std;
    bool time_ok = e2e_runtime <= 600.0;
    runner.check(
        3, "2x workload: fine-grained plan beats the best baseline",
        a && b && c && time_ok,
        strfmt("max %.3e vs %.3e (%.1fx), uvm %.4f vs %.4f, stddev %.2e vs "
               "%.2e (%.0fx), pipelines %.0fs",
               r2.milp_report.max_cost, best_max,
               best_max / r2.milp_report.max_cost,
               r2.milp_report.uvm_access_fraction, best_uvm,
               r2.milp_report.stddev_cost, best_std,
               best_std / std::max(r2.milp_report.stddev_cost, 1e-300),
               e2e_runtime));
  }

  // ---- 4. Scaling insensitivity from 1x to 4x ---------------------------
  {
    double milp_growth = r4.milp_report.max_cost / r1.milp_report.max_cost;
    bool pass = milp_growth <= 1.5;
    double worst_baseline_growth = std::numeric_limits<double>::max();
    std::string worst;
    for (size_t i = 0; i < r1.baseline_reports.size(); ++i) {
      double growth = r4.baseline_reports[i].second.max_cost /
                      r1.baseline_reports[i].second.max_cost;
      if (growth < worst_baseline_growth) {
        worst_baseline_growth = growth;
        worst = r1.baseline_reports[i].first;
      }
      if (growth < 2.0) pass = false;
    }
    runner.check(4, "max per-GPU cost growth from 1x to 4x", pass,
                 strfmt("milp %.2fx (<= 1.5), weakest baseline %s %.2fx "
                        "(>= 2.0)",
                        milp_growth, worst.c_str(), worst_baseline_growth));
  }

  // ---- 5. Birthday paradox ----------------------------------------------
  {
    const uint64_t h = 100000;
    bool pass = true;
    double lo = 1.0, hi = 0.0;
    for (uint64_t seed = 0; seed < 30; ++seed) {
      SplitMix64 rng(seed * 40093 + 7);
      std::unordered_set<uint64_t> raws;
      while (raws.size() < h) raws.insert(rng.next());
      std::vector<bool> hit(h, false);
      for (uint64_t r : raws) hit[hash_value(r, h)] = true;
      uint64_t empty = 0;
      for (bool b : hit) empty += !b;
      double frac = static_cast<double>(empty) / h;
      lo = std::min(lo, frac);
      hi = std::max(hi, frac);
      if (frac < 0.35 || frac > 0.39) pass = false;
    }
    runner.check(5, "hashing N=H distinct ids leaves ~1/e buckets empty", pass,
                 strfmt("30 seeds, empty fraction in [%.4f, %.4f]", lo, hi));
  }

  // ---- 6. Profiler fidelity at a 1% sample ------------------------------
  {
    std::vector<WorkloadSpec> specs(4);
    specs[0].table = {0, 120000, 100000, 64, 4};
    specs[0].gen = {1.1, 8.0, 0.9, PoolingLaw::kPoisson};
    specs[1].table = {1, 200000, 150000, 32, 4};
    specs[1].gen = {1.3, 5.0, 0.6, PoolingLaw::kPoisson};
    specs[2].table = {2, 80000, 90000, 64, 4};
    specs[2].gen = {0.9, 3.0, 1.0, PoolingLaw::kConstant};
    specs[3].table = {3, 60000, 50000, 16, 4};
    specs[3].gen = {1.5, 6.0, 0.75, PoolingLaw::kLognormal};
    Trace t = generate_trace(specs, 1000000, 20260814);
    auto full = profile(t, 1.0, 7);
    auto sampled = profile(t, 0.01, 7);
    bool pass = true;
    double worst_ks = 0.0, worst_pool = 0.0, worst_cov = 0.0;
    for (size_t j = 0; j < specs.size(); ++j) {
      double ks = testing::cdf_ks_distance(full[j], sampled[j]);
      double pool_err =
          std::fabs(sampled[j].avg_pooling - full[j].avg_pooling) /
          full[j].avg_pooling;
      double cov_err = std::fabs(sampled[j].coverage - full[j].coverage);
      worst_ks = std::max(worst_ks, ks);
      worst_pool = std::max(worst_pool, pool_err);
      worst_cov = std::max(worst_cov, cov_err);
      if (ks > 0.02 || pool_err > 0.02 || cov_err > 0.01) pass = false;
    }
    runner.check(6, "1% sample reproduces the full-trace statistics", pass,
                 strfmt("KS <= %.4f, pooling err <= %.4f, coverage err <= "
                        "%.4f over %zu tables",
                        worst_ks, worst_pool, worst_cov, specs.size()));
  }

  // ---- 7. ICDF against the prefix-scan oracle ---------------------------
  {
    SplitMix64 rng(777);
    bool pass = true;
    std::string detail = "1000 random count vectors, all 101 steps";
    for (int trial = 0; trial < 1000 && pass; ++trial) {
      size_t n = 1 + rng.next_below(1000);
      std::vector<uint64_t> counts(n);
      bool any = false;
      for (auto& c : counts) {
        c = rng.next_below(1000);
        any |= c > 0;
      }
      if (!any) counts[0] = 1;
      auto got = build_icdf(counts);
      auto want = testing::icdf_prefix_scan(counts);
      for (int i = 0; i <= 100; ++i) {
        if (got[i] != want[i]) {
          pass = false;
          detail = strfmt("trial %d step %d: got %llu want %llu", trial, i,
                          (unsigned long long)got[i],
                          (unsigned long long)want[i]);
          break;
        }
      }
    }
    runner.check(7, "build_icdf matches the brute-force prefix scan", pass,
                 detail);
  }

  // ---- 8. Remap and plan agree with the trace ---------------------------
  {
    bool pass = true;
    std::string detail;
    double worst_gap = 0.0;
    int split_tables = 0;
    double step_width = 1.0 / r4.milp_plan.step_count;
    for (size_t j = 0; j < r4.milp_plan.entries.size(); ++j) {
      const auto& e = r4.milp_plan.entries[j];
      if (e.pct < 1.0) ++split_tables;
      double measured = r4.milp_report.table_fast_fraction[j];
      if (std::isnan(measured)) continue;  // no accesses
      // Stats were computed at sample rate 1 over the same trace, so the
      // sampling-noise term of the tolerance is zero.
      double lo = e.pct - 1e-9;
      double hi = e.pct + step_width + 1e-9;
      worst_gap = std::max(worst_gap, measured - e.pct);
      if (measured < lo || measured > hi) {
        pass = false;
        detail = strfmt("table %u: measured %.6f outside [%.6f, %.6f]",
                        e.table_id, measured, lo, hi);
        break;
      }
    }
    if (pass) {
      // Bijectivity for every remap in the 4x milp plan.
      Trace trace =
          generate_trace(cfg4.workload, cfg4.num_samples, cfg4.workload_seed);
      auto stats = profile(trace, 1.0, cfg4.profile_seed);
      auto remaps = remaps_for(r4.milp_plan, trace.tables, stats);
      for (const auto& remap : remaps) {
        uint64_t fast_n = 0, slow_n = 0;
        unsigned __int128 fast_sum = 0, slow_sum = 0;
        std::vector<bool> seen_fast(remap.hbm_rows, false);
        for (uint64_t row = 0; row < remap.hash_size && pass; ++row) {
          auto [tier, off] = translate(remap, row);
          if (tier == Tier::kFast) {
            ++fast_n;
            fast_sum += off;
            if (off >= remap.hbm_rows || seen_fast[off]) pass = false;
            else seen_fast[off] = true;
          } else {
            ++slow_n;
            slow_sum += off;
          }
        }
        uint64_t slow_total = remap.hash_size - remap.hbm_rows;
        auto tri = [](uint64_t n) {
          return n ? static_cast<unsigned __int128>(n) * (n - 1) / 2
                   : static_cast<unsigned __int128>(0);
        };
        if (fast_n != remap.hbm_rows || slow_n != slow_total ||
            fast_sum != tri(remap.hbm_rows) || slow_sum != tri(slow_total))
          pass = false;
        if (!pass) {
          detail =
              strfmt("remap for table %u is not bijective", remap.table_id);
          break;
        }
      }
    }
    if (pass)
      detail = strfmt("all tables within one step width (max overshoot "
                      "%.4f <= %.4f, %d split tables); remaps bijective",
                      worst_gap, step_width, split_tables);
    runner.check(8, "trace-measured fast-tier hit rates match plan pct", pass,
                 detail);
  }

  // ---- 9. Amdahl endpoints ----------------------------------------------
  {
    double a = amdahl_speedup(0.75, 2.5);
    double b = amdahl_speedup(0.35, 2.5);
    bool pass = std::fabs(a - 1.82) <= 0.005 && std::fabs(b - 1.27) <= 0.005;
    runner.check(9, "end-to-end speedup endpoints", pass,
                 strfmt("speedup(0.75, 2.5) = %.4f, speedup(0.35, 2.5) = %.4f",
                        a, b));
  }

  // ---- 10. Ablation ordering on the 4x workload -------------------------
  {
    double full = r4.ablation_uvm[0].second;
    double pool = r4.ablation_uvm[1].second;
    double cov = r4.ablation_uvm[2].second;
    double cdf = r4.ablation_uvm[3].second;
    bool pass = full <= pool && pool <= cov && cov <= cdf && cdf >= 3.0 * full;
    runner.check(
        10, "statistics ablation ordering of slow-tier accesses", pass,
        strfmt("uvm/iter: full %.0f <= +pooling %.0f <= +coverage %.0f <= "
               "cdf-only %.0f; ratio %.2fx >= 3",
               full, pool, cov, cdf, cdf / std::max(full, 1e-300)));
  }

  // ---- 11. LP export round-trip ------------------------------------------
  {
    bool pass = true;
    std::string detail =
        "10 instances re-parse at 1e-12; external cross-check documented in "
        "README (tools/verify_lp_external.py)";
    for (uint64_t seed = 21; seed <= 30 && pass; ++seed) {
      auto inst = testing::random_instance(seed);
      auto model = build_lp_model(inst);
      if (model.variable_count() != variable_count(inst)) {
        pass = false;
        detail = "variable count mismatch";
        break;
      }
      auto path = (fs::temp_directory_path() /
                   strfmt("acc_model_%llu.lp", (unsigned long long)seed))
                      .string();
      write_lp_file(model, path);
      auto back = parse_lp_file(path);
      auto diff = compare_lp_models(model, back, 1e-12);
      std::remove(path.c_str());
      if (diff) {
        pass = false;
        detail = *diff;
      }
    }
    runner.check(11, "LP text export reconstructs the model", pass, detail);
  }

  std::printf("%s: %d criterion(s) failed\n",
              runner.failures ? "FAILURE" : "SUCCESS", runner.failures);
  return runner.failures ? 1 : 0;
}

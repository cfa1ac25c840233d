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

// Command-line front end: gen -> profile -> plan -> remap -> simulate ->
// compare, plus `bench` which runs the fine-grained planner against all six
// baseline sharders on one workload. Exit codes: 0 success, 1 validation or
// infeasibility, 2 usage.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shardplan/baselines.hpp"
#include "shardplan/config.hpp"
#include "shardplan/line_io.hpp"
#include "shardplan/lp_format.hpp"
#include "shardplan/milp.hpp"
#include "shardplan/profiler.hpp"
#include "shardplan/remap.hpp"
#include "shardplan/simulator.hpp"
#include "shardplan/trace_io.hpp"

namespace fs = std::filesystem;
using namespace shardplan;

namespace {

constexpr const char* kToolVersion = "shardplan-1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string trace_path;
  std::string stats_path;
  std::string plan_path;
  std::string plan_b_path;
  std::string strategy;
  std::string cost;
  std::string ablation;
  double sample_rate = -1.0;
  double time_limit = -1.0;
  int64_t steps = -1;
  int64_t seed = -1;
  bool lp_linearize = false;
};

RunConfig load_config(const Options& opt) {
  if (opt.config_path.empty()) throw UsageError("--config is required");
  RunConfig cfg = parse_config(opt.config_path);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (!opt.trace_path.empty()) cfg.trace_path = opt.trace_path;
  if (!opt.strategy.empty()) cfg.strategy = opt.strategy;
  if (!opt.cost.empty()) cfg.cost = opt.cost;
  if (!opt.ablation.empty()) cfg.ablation = ablation_from_string(opt.ablation);
  if (opt.sample_rate >= 0) cfg.sample_rate = opt.sample_rate;
  if (opt.time_limit >= 0) cfg.time_limit_s = opt.time_limit;
  if (opt.steps >= 0) cfg.step_count = static_cast<uint32_t>(opt.steps);
  if (opt.seed >= 0) {
    cfg.workload_seed = static_cast<uint64_t>(opt.seed);
    cfg.profile_seed = static_cast<uint64_t>(opt.seed);
  }
  if (cfg.strategy != "milp" && cfg.strategy != "greedy" &&
      cfg.strategy != "ldm")
    throw UsageError("--strategy must be milp, greedy, or ldm");
  if (cfg.strategy != "milp" && !cfg.cost)
    throw UsageError("--cost is required when --strategy is not milp");
  if (cfg.cost) cost_kind_from_string(*cfg.cost);  // validate spelling
  fs::create_directories(cfg.out_dir);
  return cfg;
}

std::vector<std::string> stamp(const RunConfig& cfg) {
  return {strfmt("tool=%s config=%s seed=%llu profile_seed=%llu",
                 kToolVersion, cfg.config_hash.c_str(),
                 (unsigned long long)cfg.workload_seed,
                 (unsigned long long)cfg.profile_seed)};
}

std::string default_trace_path(const RunConfig& cfg) {
  if (!cfg.trace_path.empty()) return cfg.trace_path;
  return (fs::path(cfg.out_dir) /
          (cfg.compress ? "trace.trace.gz" : "trace.trace"))
      .string();
}

Trace load_or_make_trace(const RunConfig& cfg, bool persist) {
  std::string path = default_trace_path(cfg);
  if (fs::exists(path)) return read_trace(path);
  if (cfg.workload.empty())
    throw InvalidArgument("no trace at " + path +
                          " and no workload tables to generate one");
  Trace t = generate_trace(cfg.workload, cfg.num_samples, cfg.workload_seed);
  if (persist) write_trace(t, path, stamp(cfg));
  return t;
}

ShardingPlan plan_with_strategy(const RunConfig& cfg,
                                const std::vector<TableSpec>& specs,
                                const std::vector<FeatureStats>& stats,
                                const std::string& strategy,
                                const std::string& cost_name) {
  if (strategy == "milp") {
    auto inst = build_instance(stats, specs, cfg.system, cfg.ablation,
                               cfg.step_count);
    ShardingPlan plan = solve(inst, cfg.time_limit_s);
    if (!cfg.ablation.use_pooling || !cfg.ablation.use_coverage)
      plan.strategy = strfmt("milp[%s]", to_string(cfg.ablation));
    return plan;
  }
  CostKind kind = cost_kind_from_string(cost_name);
  std::vector<double> costs;
  costs.reserve(specs.size());
  for (size_t j = 0; j < specs.size(); ++j)
    costs.push_back(table_fixed_cost(specs[j], &stats[j], kind));
  ShardingPlan plan = strategy == "greedy"
                          ? greedy_shard(costs, specs, stats, cfg.system)
                          : ldm_shard(costs, specs, stats, cfg.system);
  plan.strategy = strategy + "-" + cost_name;
  return plan;
}

std::vector<RemapTable> build_remaps(const ShardingPlan& plan,
                                     const std::vector<TableSpec>& specs,
                                     const std::vector<FeatureStats>& stats) {
  std::vector<RemapTable> remaps;
  remaps.reserve(specs.size());
  for (size_t j = 0; j < specs.size(); ++j) {
    const PlanEntry* entry = nullptr;
    for (const auto& e : plan.entries)
      if (e.table_id == specs[j].table_id) entry = &e;
    if (!entry)
      throw InvalidArgument(strfmt("plan lacks table %u", specs[j].table_id));
    remaps.push_back(build_remap(*entry, stats[j], specs[j]));
  }
  return remaps;
}

int cmd_gen(const Options& opt) {
  RunConfig cfg = load_config(opt);
  if (cfg.workload.empty())
    throw InvalidArgument("workload: table entries are required for gen");
  Trace t = generate_trace(cfg.workload, cfg.num_samples, cfg.workload_seed);
  std::string path = default_trace_path(cfg);
  write_trace(t, path, stamp(cfg));
  std::printf("wrote %s (%zu records, %zu ids)\n", path.c_str(),
              t.records.size(), t.ids.size());
  return 0;
}

int cmd_profile(const Options& opt) {
  RunConfig cfg = load_config(opt);
  Trace t = load_or_make_trace(cfg, true);
  auto stats = profile(t, cfg.sample_rate, cfg.profile_seed);
  std::string path = opt.stats_path.empty()
                         ? (fs::path(cfg.out_dir) / "stats.stats").string()
                         : opt.stats_path;
  write_stats(stats, path, stamp(cfg));
  std::printf("wrote %s (%zu tables)\n", path.c_str(), stats.size());
  return 0;
}

int cmd_plan(const Options& opt) {
  RunConfig cfg = load_config(opt);
  Trace t = load_or_make_trace(cfg, true);
  auto stats = profile(t, cfg.sample_rate, cfg.profile_seed);
  ShardingPlan plan = plan_with_strategy(cfg, t.tables, stats, cfg.strategy,
                                         cfg.cost.value_or(""));
  std::string name = "plan_" + plan.strategy + ".plan";
  std::string path = opt.plan_path.empty()
                         ? (fs::path(cfg.out_dir) / name).string()
                         : opt.plan_path;
  write_plan(plan, path, stamp(cfg));
  std::printf("wrote %s  objective=%.6e proved_optimal=%d\n", path.c_str(),
              plan.objective, plan.proved_optimal ? 1 : 0);
  return 0;
}

int cmd_export_lp(const Options& opt) {
  RunConfig cfg = load_config(opt);
  Trace t = load_or_make_trace(cfg, true);
  auto stats = profile(t, cfg.sample_rate, cfg.profile_seed);
  auto inst =
      build_instance(stats, t.tables, cfg.system, cfg.ablation, cfg.step_count);
  std::string path =
      (fs::path(cfg.out_dir) /
       (opt.lp_linearize ? "model_linearized.lp" : "model.lp"))
          .string();
  export_lp(inst, path, opt.lp_linearize, stamp(cfg));
  std::printf("wrote %s (%llu variables)\n", path.c_str(),
              (unsigned long long)variable_count(inst));
  return 0;
}

int cmd_remap(const Options& opt) {
  RunConfig cfg = load_config(opt);
  Trace t = load_or_make_trace(cfg, true);
  ShardingPlan plan = read_plan(opt.plan_path);
  // Row ranks are not serialized in stats files; rebuild from the trace.
  auto stats = profile(t, 1.0, cfg.profile_seed);
  auto remaps = build_remaps(plan, t.tables, stats);
  LineWriter manifest((fs::path(cfg.out_dir) / "remap_manifest.txt").string());
  manifest.write_line(strfmt("# %s", stamp(cfg)[0].c_str()));
  for (const auto& r : remaps) {
    std::string path =
        (fs::path(cfg.out_dir) / strfmt("remap_%u.sprm", r.table_id)).string();
    write_remap(r, path);
    manifest.write_line(strfmt("%s rows=%llu fast=%llu bytes=%llu",
                               path.c_str(), (unsigned long long)r.hash_size,
                               (unsigned long long)r.hbm_rows,
                               (unsigned long long)r.serialized_bytes()));
  }
  manifest.close();
  std::printf("wrote %zu remap tables to %s\n", remaps.size(),
              cfg.out_dir.c_str());
  return 0;
}

int cmd_simulate(const Options& opt) {
  RunConfig cfg = load_config(opt);
  Trace t = load_or_make_trace(cfg, true);
  ShardingPlan plan = read_plan(opt.plan_path);
  auto stats = profile(t, 1.0, cfg.profile_seed);
  auto remaps = build_remaps(plan, t.tables, stats);
  auto report = simulate(t, plan, remaps, cfg.system, cfg.system.batch_size);

  std::string text = format_report(report, plan.strategy);
  std::printf("%s", text.c_str());
  std::string base =
      (fs::path(cfg.out_dir) / ("report_" + plan.strategy)).string();
  {
    LineWriter w(base + ".txt");
    w.write_line(strfmt("# %s", stamp(cfg)[0].c_str()));
    w.write_line(text);
    w.close();
  }
  write_report_csv(report, base + ".csv", stamp(cfg));
  return 0;
}

int cmd_compare(const Options& opt) {
  RunConfig cfg = load_config(opt);
  Trace t = load_or_make_trace(cfg, true);
  ShardingPlan a = read_plan(opt.plan_path);
  ShardingPlan b = read_plan(opt.plan_b_path);
  auto overlap = compare_plans(a, b, t.tables);
  std::printf("uvm->hbm disparity: %.4f\nhbm->uvm disparity: %.4f\n",
              overlap.uvm_to_hbm, overlap.hbm_to_uvm);
  return 0;
}

int cmd_bench(const Options& opt) {
  RunConfig cfg = load_config(opt);
  Trace t = load_or_make_trace(cfg, true);
  auto stats = profile(t, cfg.sample_rate, cfg.profile_seed);
  // Remaps need rankings from a full-rate profile when sampling was used.
  const auto rank_stats =
      cfg.sample_rate >= 1.0 ? stats : profile(t, 1.0, cfg.profile_seed);

  struct Run {
    std::string strategy;
    std::string cost;
  };
  std::vector<Run> runs = {{"milp", ""},          {"greedy", "size"},
                           {"greedy", "lookup"},  {"greedy", "size-lookup"},
                           {"ldm", "size"},       {"ldm", "lookup"},
                           {"ldm", "size-lookup"}};

  std::string summary;
  summary += strfmt("%-22s %14s %14s %14s %12s\n", "strategy", "max_cost_s",
                    "stddev_s", "uvm_frac", "objective");
  for (const auto& run : runs) {
    ShardingPlan plan =
        plan_with_strategy(cfg, t.tables, stats, run.strategy, run.cost);
    write_plan(
        plan,
        (fs::path(cfg.out_dir) / ("plan_" + plan.strategy + ".plan")).string(),
        stamp(cfg));
    auto remaps = build_remaps(plan, t.tables, rank_stats);
    auto report = simulate(t, plan, remaps, cfg.system, cfg.system.batch_size);
    std::string base =
        (fs::path(cfg.out_dir) / ("report_" + plan.strategy)).string();
    {
      LineWriter w(base + ".txt");
      w.write_line(strfmt("# %s", stamp(cfg)[0].c_str()));
      w.write_line(format_report(report, plan.strategy));
      w.close();
    }
    write_report_csv(report, base + ".csv", stamp(cfg));
    summary += strfmt("%-22s %14.6e %14.6e %14.6f %12.4e\n",
                      plan.strategy.c_str(), report.max_cost,
                      report.stddev_cost, report.uvm_access_fraction,
                      plan.objective);
  }
  LineWriter w((fs::path(cfg.out_dir) / "comparison.txt").string());
  w.write_line(strfmt("# %s", stamp(cfg)[0].c_str()));
  w.write_line(summary);
  w.close();
  std::printf("%s", summary.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Embedding-table sharding planner and tiered-memory access simulator"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Run configuration file");
    sub->add_option("--out", opt.out_dir, "Output directory override");
    sub->add_option("--seed", opt.seed, "Seed override (workload + profile)");
    sub->add_option("--trace", opt.trace_path, "Trace file override");
  };

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic trace");
  add_common(gen);

  CLI::App* prof = app.add_subcommand("profile", "Profile a trace");
  add_common(prof);
  prof->add_option("--sample-rate", opt.sample_rate, "Sampling rate (0,1]");
  prof->add_option("--stats", opt.stats_path, "Stats output path");

  CLI::App* plan = app.add_subcommand("plan", "Compute a sharding plan");
  add_common(plan);
  plan->add_option("--strategy", opt.strategy, "milp | greedy | ldm");
  plan->add_option("--cost", opt.cost, "size | lookup | size-lookup");
  plan->add_option("--steps", opt.steps, "ICDF step count");
  plan->add_option("--time-limit", opt.time_limit, "Solver time limit (s)");
  plan->add_option("--ablation", opt.ablation,
                   "full | cdf | cdf+coverage | cdf+pooling");
  plan->add_option("--sample-rate", opt.sample_rate, "Sampling rate (0,1]");
  plan->add_option("--plan-out", opt.plan_path, "Plan output path");

  CLI::App* lp =
      app.add_subcommand("export-lp", "Write the optimization model in LP text");
  add_common(lp);
  lp->add_option("--steps", opt.steps, "ICDF step count");
  lp->add_flag("--linearize", opt.lp_linearize,
               "Replace bilinear products with exact auxiliaries");

  CLI::App* remap = app.add_subcommand("remap", "Materialize remap tables");
  add_common(remap);
  remap->add_option("--plan", opt.plan_path, "Plan file")->required();

  CLI::App* sim = app.add_subcommand("simulate", "Replay a trace on a plan");
  add_common(sim);
  sim->add_option("--plan", opt.plan_path, "Plan file")->required();

  CLI::App* cmp = app.add_subcommand("compare", "Row-overlap of two plans");
  add_common(cmp);
  cmp->add_option("--plan", opt.plan_path, "Plan A")->required();
  cmp->add_option("--plan-b", opt.plan_b_path, "Plan B")->required();

  CLI::App* bench =
      app.add_subcommand("bench", "Full pipeline: milp plus all six baselines");
  add_common(bench);
  bench->add_option("--steps", opt.steps, "ICDF step count");
  bench->add_option("--time-limit", opt.time_limit, "Solver time limit (s)");
  bench->add_option("--sample-rate", opt.sample_rate, "Sampling rate (0,1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(opt);
    if (prof->parsed()) return cmd_profile(opt);
    if (plan->parsed()) return cmd_plan(opt);
    if (lp->parsed()) return cmd_export_lp(opt);
    if (remap->parsed()) return cmd_remap(opt);
    if (sim->parsed()) return cmd_simulate(opt);
    if (cmp->parsed()) return cmd_compare(opt);
    if (bench->parsed()) return cmd_bench(opt);
    std::fprintf(stderr, "usage error: unknown subcommand\n");
    return 2;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

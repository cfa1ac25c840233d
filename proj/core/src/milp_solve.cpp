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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shardplan/milp.hpp"

namespace shardplan {
namespace {

constexpr double kRelTol = 1e-12;
constexpr double kHuge = std::numeric_limits<double>::max();

bool definitely_less(double a, double b) {
  if (b >= kHuge) return a < b;
  return a < b - kRelTol * std::max({1.0, std::fabs(a), std::fabs(b)});
}
bool roughly_equal(double a, double b) {
  return std::fabs(a - b) <=
         kRelTol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// One hull segment: advancing a table from step `from` to step `to` buys
// `dsave` cost reduction for `dmem` fast-tier bytes.
struct Seg {
  double rate = 0.0;  // dsave / dmem
  uint64_t dmem = 0;
  double dsave = 0.0;
  uint32_t from = 0;
  uint32_t to = 0;
};

// Per-table step grid: fast-tier bytes and weighted cost per step, plus the
// concave hull of the (mem, saving) curve used by the continuous relaxation.
struct Curve {
  uint64_t emb = 0;
  std::vector<uint64_t> mem;   // indexed by step
  std::vector<double> cost;    // coverage-weighted c_j at each step
  uint32_t max_step = 0;       // largest step with mem[i] <= cap_hbm
  std::vector<Seg> segs;       // hull segments, rate descending
  double cost0 = 0.0;          // cost at step 0
  double solo_min_cost = 0.0;  // min cost over usable steps
  uint64_t max_mem = 0;        // mem[max_step]
  uint64_t min_uvm = 0;        // emb - max_mem
  double impact = 0.0;         // branching key
};

struct Ctx {
  const MilpInstance* inst = nullptr;
  uint32_t num_tables = 0;
  uint32_t num_gpus = 0;
  uint32_t steps = 0;
  uint64_t cap_hbm = 0;
  uint64_t cap_dram = 0;
  std::vector<Curve> curves;  // instance order (table_id ascending)
  double root_lb = 0.0;

  // Work budget shared between assignment nodes and knapsack nodes. The
  // time limit maps to a deterministic budget so runs are reproducible.
  uint64_t budget = UINT64_MAX;
  bool budget_hit = false;

  bool charge(uint64_t n) {
    if (budget == UINT64_MAX) return true;
    if (budget < n) {
      budget = 0;
      budget_hit = true;
      return false;
    }
    budget -= n;
    return true;
  }
};

Curve make_curve(const MilpTable& t, const SystemSpec& sys,
                 const Ablation& abl, uint32_t steps, uint64_t cap_hbm) {
  Curve c;
  c.emb = t.spec.bytes();
  double w = abl.use_coverage ? t.stats.coverage : 1.0;
  uint64_t row_bytes = static_cast<uint64_t>(t.spec.dim) * t.spec.elem_bytes;
  c.mem.resize(steps + 1);
  c.cost.resize(steps + 1);
  for (uint32_t i = 0; i <= steps; ++i) {
    uint64_t rows = rows_at_step(t.stats.icdf_steps, i, steps);
    c.mem[i] = rows * row_bytes;
    double pct = static_cast<double>(i) / steps;
    c.cost[i] = w * table_cost(t.spec, t.stats, pct, sys, abl);
  }
  c.cost0 = c.cost[0];
  c.max_step = 0;
  while (c.max_step < steps && c.mem[c.max_step + 1] <= cap_hbm) ++c.max_step;
  c.max_mem = c.mem[c.max_step];
  c.min_uvm = c.emb - c.max_mem;
  c.solo_min_cost = c.cost[0];
  for (uint32_t i = 1; i <= c.max_step; ++i)
    c.solo_min_cost = std::min(c.solo_min_cost, c.cost[i]);
  c.impact = c.cost[0];

  // Upper concave hull of (mem, saving) over usable steps. Runs of equal
  // mem keep the highest step (largest saving).
  std::vector<uint32_t> pts;
  for (uint32_t i = 0; i <= c.max_step; ++i) {
    if (!pts.empty() && c.mem[pts.back()] == c.mem[i])
      pts.back() = i;
    else
      pts.push_back(i);
  }
  auto save = [&](uint32_t i) { return c.cost0 - c.cost[i]; };
  std::vector<uint32_t> hull;
  for (uint32_t i : pts) {
    while (hull.size() >= 2) {
      uint32_t a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      double lhs =
          (save(b) - save(a)) * static_cast<double>(c.mem[i] - c.mem[a]);
      double rhs =
          (save(i) - save(a)) * static_cast<double>(c.mem[b] - c.mem[a]);
      if (lhs <= rhs)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }
  for (size_t k = 1; k < hull.size(); ++k) {
    Seg s;
    s.from = hull[k - 1];
    s.to = hull[k];
    s.dmem = c.mem[s.to] - c.mem[s.from];
    s.dsave = save(s.to) - save(s.from);
    if (s.dmem == 0 || s.dsave <= 0.0) continue;
    s.rate = s.dsave / static_cast<double>(s.dmem);
    c.segs.push_back(s);
  }
  return c;
}

// Continuous best saving achievable with `cap` bytes from the given
// segments; sorts the scratch vector by rate.
double max_save_continuous(std::vector<const Seg*>& scratch, uint64_t cap) {
  std::stable_sort(scratch.begin(), scratch.end(),
                   [](const Seg* a, const Seg* b) { return a->rate > b->rate; });
  double save = 0.0;
  uint64_t left = cap;
  for (const Seg* s : scratch) {
    if (left == 0) break;
    if (s->dmem <= left) {
      save += s->dsave;
      left -= s->dmem;
    } else {
      save += s->rate * static_cast<double>(left);
      left = 0;
    }
  }
  return save;
}

// ---------------------------------------------------------------------------
// Per-GPU step selection: minimize the sum of member costs subject to
// lo <= sum(mem) <= hi (lo forces rows into the fast tier when the slow tier
// cannot hold the remainder).
// ---------------------------------------------------------------------------

struct Alloc {
  bool feasible = false;
  double cost = 0.0;
  uint64_t mem = 0;
  std::vector<uint32_t> steps;  // aligned with the member list
};

Alloc greedy_alloc(const Ctx& ctx, const std::vector<uint32_t>& members,
                   uint64_t hi, uint64_t lo) {
  Alloc a;
  a.steps.assign(members.size(), 0);
  for (uint32_t t : members) a.cost += ctx.curves[t].cost0;

  struct Ref {
    const Seg* seg;
    uint32_t local;
  };
  std::vector<Ref> refs;
  for (size_t l = 0; l < members.size(); ++l)
    for (const Seg& s : ctx.curves[members[l]].segs)
      refs.push_back({&s, static_cast<uint32_t>(l)});
  std::stable_sort(refs.begin(), refs.end(), [](const Ref& x, const Ref& y) {
    return x.seg->rate > y.seg->rate;
  });

  for (const Ref& r : refs) {
    if (a.steps[r.local] != r.seg->from) continue;  // chain broken upstream
    if (a.mem + r.seg->dmem > hi) continue;
    a.steps[r.local] = r.seg->to;
    a.mem += r.seg->dmem;
    a.cost -= r.seg->dsave;
  }

  // Fill leftover capacity step by step; advancing never raises cost and
  // also serves the lo requirement.
  for (size_t l = 0; l < members.size(); ++l) {
    const Curve& c = ctx.curves[members[l]];
    while (a.steps[l] < c.max_step) {
      uint64_t dm = c.mem[a.steps[l] + 1] - c.mem[a.steps[l]];
      if (a.mem + dm > hi) break;
      a.cost -= c.cost[a.steps[l]] - c.cost[a.steps[l] + 1];
      a.mem += dm;
      ++a.steps[l];
    }
  }

  a.feasible = a.mem >= lo && a.mem <= hi;
  a.cost = std::max(a.cost, 0.0);
  return a;
}

// Exact multiple-choice knapsack by depth-first search over the member
// tables in order, steps ascending, bounded by the continuous relaxation.
// The first optimum encountered is kept, which makes the returned step
// vector the lexicographically smallest one among cost ties.
class MckpExact {
 public:
  MckpExact(Ctx& ctx, const std::vector<uint32_t>& members, uint64_t hi,
            uint64_t lo)
      : ctx_(ctx), members_(members), hi_(hi), lo_(lo) {
    size_t n = members.size();
    suffix_cost0_.assign(n + 1, 0.0);
    suffix_max_mem_.assign(n + 1, 0);
    for (size_t d = n; d-- > 0;) {
      const Curve& c = ctx.curves[members[d]];
      suffix_cost0_[d] = suffix_cost0_[d + 1] + c.cost0;
      suffix_max_mem_[d] = suffix_max_mem_[d + 1] + c.max_mem;
    }
    for (size_t l = 0; l < n; ++l)
      for (const Seg& s : ctx.curves[members[l]].segs)
        segs_.push_back({&s, static_cast<uint32_t>(l)});
    std::stable_sort(
        segs_.begin(), segs_.end(),
        [](const Ref& x, const Ref& y) { return x.seg->rate > y.seg->rate; });
  }

  /// Searches below `cutoff`; returns the best allocation found (infeasible
  /// when nothing below the cutoff exists or the budget tripped first).
  Alloc run(double cutoff) {
    best_ = Alloc{};
    best_.cost = cutoff;
    cur_.assign(members_.size(), 0);
    dfs(0, 0, 0.0);
    return best_;
  }

 private:
  struct Ref {
    const Seg* seg;
    uint32_t local;
  };

  double suffix_bound(size_t d, uint64_t cap) const {
    double save = 0.0;
    uint64_t left = cap;
    for (const Ref& r : segs_) {
      if (left == 0) break;
      if (r.local < d) continue;
      if (r.seg->dmem <= left) {
        save += r.seg->dsave;
        left -= r.seg->dmem;
      } else {
        save += r.seg->rate * static_cast<double>(left);
        left = 0;
      }
    }
    return suffix_cost0_[d] - save;
  }

  void dfs(size_t d, uint64_t mem, double cost) {
    if (!ctx_.charge(2)) return;
    if (d == members_.size()) {
      if (mem >= lo_ && definitely_less(cost, best_.cost)) {
        best_.feasible = true;
        best_.cost = cost;
        best_.mem = mem;
        best_.steps = cur_;
      }
      return;
    }
    if (mem + suffix_max_mem_[d] < lo_) return;  // lo unreachable
    double lb = cost + suffix_bound(d, hi_ - mem);
    if (!definitely_less(lb, best_.cost)) return;
    const Curve& c = ctx_.curves[members_[d]];
    for (uint32_t i = 0; i <= c.max_step; ++i) {
      if (mem + c.mem[i] > hi_) break;
      if (ctx_.budget_hit) return;
      cur_[d] = i;
      dfs(d + 1, mem + c.mem[i], cost + c.cost[i]);
    }
  }

  Ctx& ctx_;
  const std::vector<uint32_t>& members_;
  uint64_t hi_, lo_;
  std::vector<double> suffix_cost0_;
  std::vector<uint64_t> suffix_max_mem_;
  std::vector<Ref> segs_;
  Alloc best_;
  std::vector<uint32_t> cur_;
};

uint64_t gpu_lo(const Ctx& ctx, const std::vector<uint32_t>& members) {
  uint64_t emb = 0;
  for (uint32_t t : members) emb += ctx.curves[t].emb;
  return emb > ctx.cap_dram ? emb - ctx.cap_dram : 0;
}

enum class GpuSolveMode { kGreedy, kExactLex, kExactWarm };

Alloc solve_gpu(Ctx& ctx, const std::vector<uint32_t>& members,
                GpuSolveMode mode) {
  uint64_t lo = gpu_lo(ctx, members);
  if (mode == GpuSolveMode::kGreedy)
    return greedy_alloc(ctx, members, ctx.cap_hbm, lo);
  if (mode == GpuSolveMode::kExactLex) {
    MckpExact mckp(ctx, members, ctx.cap_hbm, lo);
    return mckp.run(kHuge);
  }
  // Warm-started exact polish: the greedy allocation caps the search.
  Alloc g = greedy_alloc(ctx, members, ctx.cap_hbm, lo);
  MckpExact mckp(ctx, members, ctx.cap_hbm, lo);
  Alloc e = mckp.run(g.feasible ? g.cost : kHuge);
  if (e.feasible) return e;
  return g;
}

// ---------------------------------------------------------------------------
// Incumbents
// ---------------------------------------------------------------------------

struct Candidate {
  bool valid = false;
  double objective = 0.0;
  double total = 0.0;
  std::vector<uint32_t> gpu;   // per table, instance order, canonical labels
  std::vector<uint32_t> step;  // per table, instance order
};

// Relabels GPUs by first use in table order so symmetric assignments compare
// equal; capacities are uniform, so relabeling never changes feasibility.
void canonicalize(Candidate& c, uint32_t num_gpus) {
  std::vector<uint32_t> map(num_gpus, UINT32_MAX);
  uint32_t next = 0;
  for (uint32_t& g : c.gpu) {
    if (map[g] == UINT32_MAX) map[g] = next++;
    g = map[g];
  }
}

// Preference order: objective, then total cost, then lexicographic
// (assignment vector, step vector).
bool better_than(const Candidate& a, const Candidate& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  if (definitely_less(a.objective, b.objective)) return true;
  if (definitely_less(b.objective, a.objective)) return false;
  if (definitely_less(a.total, b.total)) return true;
  if (definitely_less(b.total, a.total)) return false;
  if (a.gpu != b.gpu) return a.gpu < b.gpu;
  return a.step < b.step;
}

Candidate evaluate_assignment(Ctx& ctx, const std::vector<uint32_t>& gpu_of,
                              GpuSolveMode mode) {
  Candidate cand;
  std::vector<std::vector<uint32_t>> members(ctx.num_gpus);
  for (uint32_t t = 0; t < ctx.num_tables; ++t)
    members[gpu_of[t]].push_back(t);

  cand.gpu = gpu_of;
  cand.step.assign(ctx.num_tables, 0);
  double objective = 0.0, total = 0.0;
  for (uint32_t m = 0; m < ctx.num_gpus; ++m) {
    if (members[m].empty()) continue;
    Alloc a = solve_gpu(ctx, members[m], mode);
    if (!a.feasible) return cand;  // invalid
    for (size_t l = 0; l < members[m].size(); ++l)
      cand.step[members[m][l]] = a.steps[l];
    objective = std::max(objective, a.cost);
    total += a.cost;
  }
  cand.objective = objective;
  cand.total = total;
  cand.valid = true;
  canonicalize(cand, ctx.num_gpus);
  return cand;
}

// ---------------------------------------------------------------------------
// Assignment branch and bound
// ---------------------------------------------------------------------------

class AssignSearch {
 public:
  AssignSearch(Ctx& ctx, bool exact)
      : ctx_(ctx), exact_(exact), members_(ctx.num_gpus),
        gpu_lb_(ctx.num_gpus, 0.0), gpu_min_uvm_(ctx.num_gpus, 0),
        gpu_of_(ctx.num_tables, UINT32_MAX) {
    order_.resize(ctx.num_tables);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](uint32_t a, uint32_t b) {
      return ctx_.curves[a].impact > ctx_.curves[b].impact;
    });
    solo_suffix_.assign(ctx.num_tables + 1, 0.0);
    for (size_t d = ctx.num_tables; d-- > 0;)
      solo_suffix_[d] = std::max(solo_suffix_[d + 1],
                                 ctx_.curves[order_[d]].solo_min_cost);
  }

  void run(Candidate& incumbent) {
    incumbent_ = &incumbent;
    dfs(0, 0);
  }

 private:
  double relaxed_gpu_lb(uint32_t m) {
    std::vector<const Seg*> scratch;
    double base = 0.0;
    for (uint32_t t : members_[m]) {
      base += ctx_.curves[t].cost0;
      for (const Seg& s : ctx_.curves[t].segs) scratch.push_back(&s);
    }
    return base - max_save_continuous(scratch, ctx_.cap_hbm);
  }

  void dfs(uint32_t depth, uint32_t used_gpus) {
    if (ctx_.budget_hit) return;
    if (depth == ctx_.num_tables) {
      if (!ctx_.charge(20 + 4ULL * ctx_.num_tables)) return;
      Candidate cand = evaluate_assignment(
          ctx_, gpu_of_, exact_ ? GpuSolveMode::kExactLex
                                : GpuSolveMode::kGreedy);
      if (cand.valid && better_than(cand, *incumbent_)) *incumbent_ = cand;
      return;
    }
    uint32_t t = order_[depth];
    uint32_t open = std::min<uint32_t>(ctx_.num_gpus, used_gpus + 1);
    for (uint32_t g = 0; g < open; ++g) {
      if (!ctx_.charge(4 + members_[g].size())) return;
      // Slow-tier feasibility: even at maximal fast-tier usage this GPU's
      // members must fit cap_dram.
      if (gpu_min_uvm_[g] + ctx_.curves[t].min_uvm > ctx_.cap_dram) continue;

      members_[g].push_back(t);
      gpu_of_[t] = g;
      gpu_min_uvm_[g] += ctx_.curves[t].min_uvm;
      double saved_lb = gpu_lb_[g];
      gpu_lb_[g] = relaxed_gpu_lb(g);

      double node_lb = std::max(ctx_.root_lb, solo_suffix_[depth + 1]);
      for (uint32_t m = 0; m < ctx_.num_gpus; ++m)
        node_lb = std::max(node_lb, gpu_lb_[m]);
      bool prune = incumbent_->valid &&
                   !definitely_less(node_lb, incumbent_->objective) &&
                   !roughly_equal(node_lb, incumbent_->objective);
      if (!prune) dfs(depth + 1, std::max(used_gpus, g + 1));

      gpu_lb_[g] = saved_lb;
      gpu_min_uvm_[g] -= ctx_.curves[t].min_uvm;
      gpu_of_[t] = UINT32_MAX;
      members_[g].pop_back();
      if (ctx_.budget_hit) return;
    }
  }

  Ctx& ctx_;
  bool exact_;
  std::vector<uint32_t> order_;
  std::vector<double> solo_suffix_;
  std::vector<std::vector<uint32_t>> members_;
  std::vector<double> gpu_lb_;
  std::vector<uint64_t> gpu_min_uvm_;
  std::vector<uint32_t> gpu_of_;
  Candidate* incumbent_ = nullptr;
};

// ---------------------------------------------------------------------------
// Heuristics for instances beyond exact scale
// ---------------------------------------------------------------------------

Candidate lpt_seed(Ctx& ctx) {
  std::vector<uint32_t> order(ctx.num_tables);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return ctx.curves[a].impact > ctx.curves[b].impact;
  });

  std::vector<std::vector<uint32_t>> members(ctx.num_gpus);
  std::vector<double> cost(ctx.num_gpus, 0.0);
  std::vector<uint32_t> gpu_of(ctx.num_tables, 0);
  for (uint32_t t : order) {
    double best_peak = kHuge;
    uint32_t best_g = 0;
    double best_cost = 0.0;
    bool placed = false;
    for (uint32_t g = 0; g < ctx.num_gpus; ++g) {
      auto& mem = members[g];
      mem.insert(std::lower_bound(mem.begin(), mem.end(), t), t);
      Alloc a = greedy_alloc(ctx, mem, ctx.cap_hbm, gpu_lo(ctx, mem));
      mem.erase(std::find(mem.begin(), mem.end(), t));
      if (!a.feasible) continue;
      double peak = a.cost;
      for (uint32_t o = 0; o < ctx.num_gpus; ++o)
        if (o != g) peak = std::max(peak, cost[o]);
      if (definitely_less(peak, best_peak)) {
        best_peak = peak;
        best_g = g;
        best_cost = a.cost;
        placed = true;
      }
    }
    auto& mem = members[best_g];
    mem.insert(std::lower_bound(mem.begin(), mem.end(), t), t);
    if (placed) cost[best_g] = best_cost;
    gpu_of[t] = best_g;
  }
  return evaluate_assignment(ctx, gpu_of, GpuSolveMode::kGreedy);
}

Candidate local_search(Ctx& ctx, Candidate start) {
  if (!start.valid) return start;
  Candidate cur = start;

  for (int round = 0; round < 200; ++round) {
    std::vector<std::vector<uint32_t>> members(ctx.num_gpus);
    std::vector<double> cost(ctx.num_gpus, 0.0);
    for (uint32_t t = 0; t < ctx.num_tables; ++t)
      members[cur.gpu[t]].push_back(t);
    for (uint32_t g = 0; g < ctx.num_gpus; ++g) {
      if (members[g].empty()) continue;
      Alloc a =
          greedy_alloc(ctx, members[g], ctx.cap_hbm, gpu_lo(ctx, members[g]));
      cost[g] = a.feasible ? a.cost : kHuge;
    }
    uint32_t b = 0;
    for (uint32_t g = 1; g < ctx.num_gpus; ++g)
      if (cost[g] > cost[b]) b = g;

    auto improves = [&](const Candidate& cand) {
      return definitely_less(cand.objective, cur.objective) ||
             (roughly_equal(cand.objective, cur.objective) &&
              definitely_less(cand.total, cur.total));
    };

    Candidate best_next;
    for (uint32_t t : members[b]) {
      for (uint32_t g = 0; g < ctx.num_gpus; ++g) {
        if (g == b) continue;
        std::vector<uint32_t> gpu_of = cur.gpu;
        gpu_of[t] = g;
        Candidate cand =
            evaluate_assignment(ctx, gpu_of, GpuSolveMode::kGreedy);
        if (cand.valid && improves(cand) && better_than(cand, best_next))
          best_next = cand;
      }
    }
    if (!best_next.valid) {
      for (uint32_t t : members[b]) {
        for (uint32_t g = 0; g < ctx.num_gpus; ++g) {
          if (g == b) continue;
          for (uint32_t u : members[g]) {
            std::vector<uint32_t> gpu_of = cur.gpu;
            gpu_of[t] = g;
            gpu_of[u] = b;
            Candidate cand =
                evaluate_assignment(ctx, gpu_of, GpuSolveMode::kGreedy);
            if (cand.valid && improves(cand) && better_than(cand, best_next))
              best_next = cand;
          }
        }
      }
    }
    if (!best_next.valid) break;
    cur = best_next;
  }
  return cur;
}

// Re-solves the incumbent's per-GPU step choices with the warm-started
// exact search; keeps whichever is better.
Candidate polish(Ctx& ctx, const Candidate& cand) {
  if (!cand.valid) return cand;
  Candidate out = evaluate_assignment(ctx, cand.gpu, GpuSolveMode::kExactWarm);
  if (out.valid && better_than(out, cand)) return out;
  return cand;
}

double pooled_root_lb(const Ctx& ctx) {
  std::vector<const Seg*> scratch;
  double base = 0.0;
  double solo = 0.0;
  for (const Curve& c : ctx.curves) {
    base += c.cost0;
    solo = std::max(solo, c.solo_min_cost);
    for (const Seg& s : c.segs) scratch.push_back(&s);
  }
  double pooled =
      (base -
       max_save_continuous(scratch, ctx.cap_hbm * uint64_t{ctx.num_gpus})) /
      ctx.num_gpus;
  return std::max(pooled, solo);
}

}  // namespace

ShardingPlan solve(const MilpInstance& inst, double time_limit_seconds) {
  if (inst.tables.empty()) throw InvalidArgument("solve: no tables");
  validate(inst.system);

  const SystemSpec& sys = inst.system;
  uint64_t total_bytes = 0;
  for (const auto& t : inst.tables) total_bytes += t.spec.bytes();
  uint64_t aggregate =
      uint64_t{sys.num_gpus} * (sys.cap_hbm_bytes + sys.cap_dram_bytes);
  if (total_bytes > aggregate)
    throw InfeasibleError(strfmt(
        "total table bytes %llu exceed aggregate capacity M*(cap_hbm+"
        "cap_dram) = %llu (fast/slow capacity constraints)",
        (unsigned long long)total_bytes, (unsigned long long)aggregate));

  Ctx ctx;
  ctx.inst = &inst;
  ctx.num_tables = static_cast<uint32_t>(inst.tables.size());
  ctx.num_gpus = sys.num_gpus;
  ctx.steps = inst.step_count;
  ctx.cap_hbm = sys.cap_hbm_bytes;
  ctx.cap_dram = sys.cap_dram_bytes;
  ctx.curves.reserve(inst.tables.size());
  for (const auto& t : inst.tables)
    ctx.curves.push_back(
        make_curve(t, sys, inst.ablation, inst.step_count, sys.cap_hbm_bytes));

  for (size_t j = 0; j < inst.tables.size(); ++j) {
    const Curve& c = ctx.curves[j];
    if (c.min_uvm > ctx.cap_dram)
      throw InfeasibleError(strfmt(
          "table %u needs %llu slow-tier bytes even at its maximal fast-tier "
          "split, exceeding cap_dram %llu (slow-tier capacity constraint)",
          inst.tables[j].spec.table_id, (unsigned long long)c.min_uvm,
          (unsigned long long)ctx.cap_dram));
  }

  bool exact_mode =
      ctx.num_tables <= 10 && ctx.num_gpus <= 3 && ctx.steps <= 12;
  if (exact_mode) {
    ctx.budget = UINT64_MAX;
  } else if (!std::isfinite(time_limit_seconds)) {
    ctx.budget = 20ULL * 1000 * 1000;  // default effort, ~1 minute
  } else {
    double nodes = std::max(1.0, time_limit_seconds) * 350000.0;
    ctx.budget = static_cast<uint64_t>(std::min(nodes, 4e9));
  }
  ctx.root_lb = pooled_root_lb(ctx);

  Candidate incumbent;
  if (!exact_mode) {
    incumbent = polish(ctx, local_search(ctx, lpt_seed(ctx)));
  }
  AssignSearch search(ctx, exact_mode);
  search.run(incumbent);
  if (!exact_mode && incumbent.valid) incumbent = polish(ctx, incumbent);

  if (!incumbent.valid) {
    if (!ctx.budget_hit)
      throw InfeasibleError(
          "no feasible placement exists: per-GPU fast/slow capacity "
          "constraints cannot all be met");
    throw InfeasibleError(
        "no feasible placement found within the search budget; raise the "
        "time limit or capacities");
  }

  bool proved = !ctx.budget_hit;
  ShardingPlan plan;
  plan.strategy = "milp";
  plan.step_count = inst.step_count;
  plan.proved_optimal = proved;
  plan.entries.reserve(inst.tables.size());
  for (uint32_t t = 0; t < ctx.num_tables; ++t) {
    const auto& tab = inst.tables[t];
    PlanEntry e;
    e.table_id = tab.spec.table_id;
    e.gpu = incumbent.gpu[t];
    e.step = incumbent.step[t];
    e.pct = static_cast<double>(e.step) / inst.step_count;
    e.hbm_rows = rows_at_step(tab.stats.icdf_steps, e.step, inst.step_count);
    e.mem_bytes = e.hbm_rows * tab.spec.dim * tab.spec.elem_bytes;
    plan.entries.push_back(e);
  }
  recompute_plan_costs(plan, inst);
  plan.lower_bound = proved ? plan.objective : ctx.root_lb;
  return plan;
}

}  // namespace shardplan

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

#include "shardplan/lp_format.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "shardplan/line_io.hpp"

namespace shardplan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) { return strfmt("%.17g", v); }

std::pair<std::string, std::string> qkey(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

void append_linear(std::string& line,
                   const std::map<std::string, double>& terms, bool& first) {
  for (const auto& [var, coef] : terms) {
    if (coef == 0.0) continue;
    if (first) {
      line += coef < 0 ? "- " : "";
      first = false;
    } else {
      line += coef < 0 ? " - " : " + ";
    }
    line += num(std::fabs(coef));
    line += ' ';
    line += var;
  }
}

}  // namespace

LpModel build_lp_model(const MilpInstance& inst, bool linearize) {
  const auto& sys = inst.system;
  size_t j_count = inst.tables.size();
  uint32_t steps = inst.step_count;
  LpModel m;

  auto pvar = [](uint32_t g, size_t j) { return strfmt("p_%u_%zu", g, j); };
  auto xvar = [](uint32_t i, size_t j) { return strfmt("x_%u_%zu", i, j); };
  auto memvar = [](size_t j) { return strfmt("mem_%zu", j); };
  auto pctvar = [](size_t j) { return strfmt("pct_%zu", j); };
  auto cvar = [](uint32_t g) { return strfmt("c_%u", g); };

  for (uint32_t g = 0; g < sys.num_gpus; ++g)
    for (size_t j = 0; j < j_count; ++j)
      m.vars.push_back({pvar(g, j), 0.0, 1.0, true});
  for (uint32_t i = 0; i <= steps; ++i)
    for (size_t j = 0; j < j_count; ++j)
      m.vars.push_back({xvar(i, j), 0.0, 1.0, true});
  std::vector<uint64_t> mem_max(j_count, 0);
  for (size_t j = 0; j < j_count; ++j) {
    const auto& t = inst.tables[j];
    mem_max[j] = rows_at_step(t.stats.icdf_steps, steps, steps) *
                 t.spec.dim * t.spec.elem_bytes;
    m.vars.push_back({memvar(j), 0.0, static_cast<double>(mem_max[j]), false});
  }
  for (size_t j = 0; j < j_count; ++j)
    m.vars.push_back({pctvar(j), 0.0, 1.0, false});
  for (uint32_t g = 0; g < sys.num_gpus; ++g)
    m.vars.push_back({cvar(g), 0.0, kInf, false});
  m.vars.push_back({"C", 0.0, kInf, false});
  if (linearize) {
    for (uint32_t g = 0; g < sys.num_gpus; ++g)
      for (size_t j = 0; j < j_count; ++j) {
        m.vars.push_back({strfmt("pm_%u_%zu", g, j), 0.0,
                          static_cast<double>(mem_max[j]), false});
        m.vars.push_back({strfmt("pp_%u_%zu", g, j), 0.0, 1.0, false});
      }
  }

  m.objective["C"] = 1.0;

  // Product of p_g_j with mem_j / pct_j, as a quadratic term or via the
  // auxiliary variable plus its envelope constraints.
  auto add_product = [&](LpModel::Constraint& c, uint32_t g, size_t j,
                         bool is_mem, double coef) {
    if (!linearize) {
      c.quad[qkey(pvar(g, j), is_mem ? memvar(j) : pctvar(j))] += coef;
    } else {
      c.linear[is_mem ? strfmt("pm_%u_%zu", g, j)
                      : strfmt("pp_%u_%zu", g, j)] += coef;
    }
  };

  for (size_t j = 0; j < j_count; ++j) {
    LpModel::Constraint assign;
    assign.name = strfmt("assign_%zu", j);
    for (uint32_t g = 0; g < sys.num_gpus; ++g) assign.linear[pvar(g, j)] = 1.0;
    assign.sense = 'E';
    assign.rhs = 1.0;
    m.constraints.push_back(std::move(assign));

    LpModel::Constraint step;
    step.name = strfmt("step_%zu", j);
    for (uint32_t i = 0; i <= steps; ++i) step.linear[xvar(i, j)] = 1.0;
    step.sense = 'E';
    step.rhs = 1.0;
    m.constraints.push_back(std::move(step));

    const auto& t = inst.tables[j];
    LpModel::Constraint memdef;
    memdef.name = strfmt("memdef_%zu", j);
    for (uint32_t i = 0; i <= steps; ++i) {
      double bytes = static_cast<double>(
          rows_at_step(t.stats.icdf_steps, i, steps) * t.spec.dim *
          t.spec.elem_bytes);
      if (bytes != 0.0) memdef.linear[xvar(i, j)] = bytes;
    }
    memdef.linear[memvar(j)] = -1.0;
    memdef.sense = 'E';
    memdef.rhs = 0.0;
    m.constraints.push_back(std::move(memdef));

    LpModel::Constraint pctdef;
    pctdef.name = strfmt("pctdef_%zu", j);
    for (uint32_t i = 1; i <= steps; ++i)
      pctdef.linear[xvar(i, j)] = static_cast<double>(i) / steps;
    pctdef.linear[pctvar(j)] = -1.0;
    pctdef.sense = 'E';
    pctdef.rhs = 0.0;
    m.constraints.push_back(std::move(pctdef));
  }

  for (uint32_t g = 0; g < sys.num_gpus; ++g) {
    LpModel::Constraint hbm;
    hbm.name = strfmt("caphbm_%u", g);
    for (size_t j = 0; j < j_count; ++j) add_product(hbm, g, j, true, 1.0);
    hbm.sense = 'L';
    hbm.rhs = static_cast<double>(sys.cap_hbm_bytes);
    m.constraints.push_back(std::move(hbm));

    LpModel::Constraint uvm;
    uvm.name = strfmt("capuvm_%u", g);
    for (size_t j = 0; j < j_count; ++j) {
      uvm.linear[pvar(g, j)] += static_cast<double>(inst.tables[j].spec.bytes());
      add_product(uvm, g, j, true, -1.0);
    }
    uvm.sense = 'L';
    uvm.rhs = static_cast<double>(sys.cap_dram_bytes);
    m.constraints.push_back(std::move(uvm));

    // c_m = sum_j coverage_j * (K_j/bw_uvm * p + K_j*(1/bw_hbm - 1/bw_uvm)
    // * p*pct), with K_j the per-step byte demand.
    LpModel::Constraint cost;
    cost.name = strfmt("cost_%u", g);
    for (size_t j = 0; j < j_count; ++j) {
      const auto& t = inst.tables[j];
      double w = inst.ablation.use_coverage ? t.stats.coverage : 1.0;
      double pool = inst.ablation.use_pooling ? t.stats.avg_pooling : 1.0;
      double demand = pool * t.spec.dim * t.spec.elem_bytes *
                      static_cast<double>(sys.batch_size);
      double base = w * demand / sys.bw_uvm;
      double slope = w * demand * (1.0 / sys.bw_hbm - 1.0 / sys.bw_uvm);
      if (base != 0.0) cost.linear[pvar(g, j)] += base;
      if (slope != 0.0) add_product(cost, g, j, false, slope);
    }
    cost.linear[cvar(g)] = -1.0;
    cost.sense = 'E';
    cost.rhs = 0.0;
    m.constraints.push_back(std::move(cost));

    LpModel::Constraint maxc;
    maxc.name = strfmt("maxcost_%u", g);
    maxc.linear[cvar(g)] = 1.0;
    maxc.linear["C"] = -1.0;
    maxc.sense = 'L';
    maxc.rhs = 0.0;
    m.constraints.push_back(std::move(maxc));
  }

  if (linearize) {
    // Exact envelopes for products of a binary with a bounded continuous.
    for (uint32_t g = 0; g < sys.num_gpus; ++g) {
      for (size_t j = 0; j < j_count; ++j) {
        double ubm = static_cast<double>(mem_max[j]);
        std::string pm = strfmt("pm_%u_%zu", g, j);
        std::string pp = strfmt("pp_%u_%zu", g, j);
        auto push = [&](const std::string& name,
                        std::map<std::string, double> lin, char sense,
                        double rhs) {
          LpModel::Constraint c;
          c.name = name;
          c.linear = std::move(lin);
          c.sense = sense;
          c.rhs = rhs;
          m.constraints.push_back(std::move(c));
        };
        push(strfmt("pmub1_%u_%zu", g, j),
             {{pm, 1.0}, {pvar(g, j), -ubm}}, 'L', 0.0);
        push(strfmt("pmub2_%u_%zu", g, j), {{pm, 1.0}, {memvar(j), -1.0}},
             'L', 0.0);
        push(strfmt("pmlb_%u_%zu", g, j),
             {{pm, 1.0}, {memvar(j), -1.0}, {pvar(g, j), -ubm}}, 'G', -ubm);
        push(strfmt("ppub1_%u_%zu", g, j), {{pp, 1.0}, {pvar(g, j), -1.0}},
             'L', 0.0);
        push(strfmt("ppub2_%u_%zu", g, j), {{pp, 1.0}, {pctvar(j), -1.0}},
             'L', 0.0);
        push(strfmt("pplb_%u_%zu", g, j),
             {{pp, 1.0}, {pctvar(j), -1.0}, {pvar(g, j), -1.0}}, 'G', -1.0);
      }
    }
  }
  return m;
}

void write_lp_file(const LpModel& m, const std::string& path,
                   const std::vector<std::string>& comments) {
  LineWriter w(path);
  w.write_line("\\ shardplan lp export v1");
  for (const auto& c : comments) w.write_line("\\ " + c);
  w.write_line("Minimize");
  {
    std::string line = " obj: ";
    bool first = true;
    append_linear(line, m.objective, first);
    w.write_line(line);
  }
  w.write_line("Subject To");
  for (const auto& c : m.constraints) {
    std::string line = " " + c.name + ": ";
    bool first = true;
    append_linear(line, c.linear, first);
    if (!c.quad.empty()) {
      line += first ? "[ " : " + [ ";
      bool qfirst = true;
      for (const auto& [vars, coef] : c.quad) {
        if (coef == 0.0) continue;
        if (qfirst) {
          line += coef < 0 ? "- " : "";
          qfirst = false;
        } else {
          line += coef < 0 ? " - " : " + ";
        }
        line += num(std::fabs(coef));
        line += ' ';
        line += vars.first + " * " + vars.second;
      }
      line += " ]";
      first = false;
    }
    if (first) line += "0 C";  // degenerate empty row
    line += c.sense == 'L' ? " <= " : (c.sense == 'G' ? " >= " : " = ");
    line += num(c.rhs);
    w.write_line(line);
  }
  w.write_line("Bounds");
  for (const auto& v : m.vars) {
    if (v.binary) continue;
    if (std::isinf(v.ub))
      w.write_line(strfmt(" %s >= %s", v.name.c_str(), num(v.lb).c_str()));
    else
      w.write_line(strfmt(" %s <= %s <= %s", num(v.lb).c_str(),
                          v.name.c_str(), num(v.ub).c_str()));
  }
  w.write_line("Binaries");
  {
    std::string line;
    for (const auto& v : m.vars) {
      if (!v.binary) continue;
      if (!line.empty()) line += ' ';
      line += v.name;
      if (line.size() > 200) {
        w.write_line(" " + line);
        line.clear();
      }
    }
    if (!line.empty()) w.write_line(" " + line);
  }
  w.write_line("End");
  w.close();
}

namespace {

struct Tokenizer {
  std::vector<std::string> toks;
  size_t pos = 0;

  bool done() const { return pos >= toks.size(); }
  const std::string& peek() const { return toks[pos]; }
  std::string take() { return toks[pos++]; }
  bool accept(const std::string& s) {
    if (!done() && toks[pos] == s) {
      ++pos;
      return true;
    }
    return false;
  }
};

bool is_number_start(const std::string& t) {
  char c = t[0];
  return (c >= '0' && c <= '9') || c == '.' ||
         ((c == '+' || c == '-') && t.size() > 1);
}

// Reads [sign] [coef] var [* var] and adds it to the constraint maps.
void parse_term(Tokenizer& tz, std::map<std::string, double>& lin,
                std::map<std::pair<std::string, std::string>, double>* quad,
                double sign) {
  double coef = sign;
  if (!tz.done() && is_number_start(tz.peek())) coef *= std::stod(tz.take());
  if (tz.done()) throw ParseError("lp: dangling coefficient");
  std::string var = tz.take();
  if (!tz.done() && tz.peek() == "*") {
    tz.take();
    if (tz.done()) throw ParseError("lp: dangling '*'");
    std::string var2 = tz.take();
    if (!quad) throw ParseError("lp: product outside [ ] section");
    (*quad)[qkey(var, var2)] += coef;
    return;
  }
  lin[var] += coef;
}

}  // namespace

LpModel parse_lp_file(const std::string& path) {
  LineReader r(path);
  LpModel m;
  std::string line;
  enum Section { kNone, kObjective, kConstraints, kBounds, kBinaries, kEnd };
  Section section = kNone;
  std::vector<std::string> binaries;

  // Bounds seen so far; defaults applied at the end.
  std::map<std::string, std::pair<double, double>> bounds;
  std::vector<std::string> var_order;
  auto note_var = [&](const std::string& v) {
    if (!bounds.count(v)) {
      bounds[v] = {0.0, kInf};
      var_order.push_back(v);
    }
  };

  while (r.next_line(line)) {
    size_t ln = r.line_number();
    // Strip comments.
    size_t bs = line.find('\\');
    if (bs != std::string::npos) line = line.substr(0, bs);
    // Tokenize on whitespace with ':' split off.
    Tokenizer tz;
    std::string cur;
    for (char ch : line) {
      if (ch == ' ' || ch == '\t' || ch == ':') {
        if (!cur.empty()) tz.toks.push_back(cur);
        if (ch == ':') tz.toks.push_back(":");
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!cur.empty()) tz.toks.push_back(cur);
    if (tz.toks.empty()) continue;

    std::string head = tz.toks[0];
    if (head == "Minimize" || head == "minimize" || head == "MINIMIZE") {
      section = kObjective;
      continue;
    }
    if (head == "Subject" || head == "subject") {
      section = kConstraints;
      continue;
    }
    if (head == "Bounds" || head == "bounds") {
      section = kBounds;
      continue;
    }
    if (head == "Binaries" || head == "Binary" || head == "binaries") {
      section = kBinaries;
      continue;
    }
    if (head == "End" || head == "end") {
      section = kEnd;
      continue;
    }

    switch (section) {
      case kObjective: {
        // " obj: terms"
        if (tz.toks.size() >= 2 && tz.toks[1] == ":") tz.pos = 2;
        double sign = 1.0;
        while (!tz.done()) {
          if (tz.accept("+")) sign = 1.0;
          else if (tz.accept("-")) sign = -1.0;
          parse_term(tz, m.objective, nullptr, sign);
          sign = 1.0;
        }
        for (const auto& [v, c] : m.objective) note_var(v);
        break;
      }
      case kConstraints: {
        LpModel::Constraint c;
        if (tz.toks.size() < 2 || tz.toks[1] != ":")
          throw ParseError("lp: constraint without name", ln);
        c.name = tz.take();
        tz.take();  // ':'
        bool in_quad = false;
        double sign = 1.0;
        while (!tz.done()) {
          const std::string& t = tz.peek();
          if (t == "<=" || t == ">=" || t == "=") {
            c.sense = t == "<=" ? 'L' : (t == ">=" ? 'G' : 'E');
            tz.take();
            c.rhs = std::stod(tz.take());
            break;
          }
          if (t == "+") { tz.take(); sign = 1.0; continue; }
          if (t == "-") { tz.take(); sign = -1.0; continue; }
          if (t == "[") { tz.take(); in_quad = true; sign = 1.0; continue; }
          if (t == "]") { tz.take(); in_quad = false; sign = 1.0; continue; }
          parse_term(tz, c.linear, in_quad ? &c.quad : nullptr, sign);
          sign = 1.0;
        }
        for (const auto& [v, coef] : c.linear) note_var(v);
        for (const auto& [vs, coef] : c.quad) {
          note_var(vs.first);
          note_var(vs.second);
        }
        m.constraints.push_back(std::move(c));
        break;
      }
      case kBounds: {
        // " lb <= var <= ub" or " var >= lb"
        if (tz.toks.size() == 5 && tz.toks[1] == "<=" && tz.toks[3] == "<=") {
          note_var(tz.toks[2]);
          bounds[tz.toks[2]] = {std::stod(tz.toks[0]), std::stod(tz.toks[4])};
        } else if (tz.toks.size() == 3 && tz.toks[1] == ">=") {
          note_var(tz.toks[0]);
          bounds[tz.toks[0]] = {std::stod(tz.toks[2]), kInf};
        } else if (tz.toks.size() == 3 && tz.toks[1] == "<=") {
          note_var(tz.toks[0]);
          bounds[tz.toks[0]] = {0.0, std::stod(tz.toks[2])};
        } else {
          throw ParseError("lp: unsupported bounds line", ln);
        }
        break;
      }
      case kBinaries: {
        while (!tz.done()) {
          std::string v = tz.take();
          note_var(v);
          binaries.push_back(v);
          bounds[v] = {0.0, 1.0};
        }
        break;
      }
      default:
        throw ParseError("lp: content outside any section", ln);
    }
  }

  for (const auto& v : var_order) {
    LpModel::Var var;
    var.name = v;
    var.lb = bounds[v].first;
    var.ub = bounds[v].second;
    m.vars.push_back(var);
  }
  for (const auto& b : binaries)
    for (auto& v : m.vars)
      if (v.name == b) v.binary = true;
  return m;
}

std::optional<std::string> compare_lp_models(const LpModel& a,
                                             const LpModel& b, double tol) {
  auto close = [&](double x, double y) {
    return std::fabs(x - y) <= tol * std::max({1.0, std::fabs(x), std::fabs(y)});
  };

  if (a.vars.size() != b.vars.size())
    return strfmt("variable count differs: %zu vs %zu", a.vars.size(),
                  b.vars.size());
  std::map<std::string, LpModel::Var> bv;
  for (const auto& v : b.vars) bv[v.name] = v;
  for (const auto& v : a.vars) {
    auto it = bv.find(v.name);
    if (it == bv.end()) return "missing variable " + v.name;
    if (v.binary != it->second.binary)
      return "binary flag differs for " + v.name;
    if (!close(v.lb, it->second.lb))
      return "lower bound differs for " + v.name;
    bool ainf = std::isinf(v.ub), binf = std::isinf(it->second.ub);
    if (ainf != binf || (!ainf && !close(v.ub, it->second.ub)))
      return "upper bound differs for " + v.name;
  }

  for (const auto& [v, c] : a.objective) {
    auto it = b.objective.find(v);
    if (it == b.objective.end() || !close(c, it->second))
      return "objective coefficient differs for " + v;
  }
  if (a.objective.size() != b.objective.size())
    return "objective term count differs";

  if (a.constraints.size() != b.constraints.size())
    return strfmt("constraint count differs: %zu vs %zu", a.constraints.size(),
                  b.constraints.size());
  std::map<std::string, const LpModel::Constraint*> bc;
  for (const auto& c : b.constraints) bc[c.name] = &c;
  for (const auto& c : a.constraints) {
    auto it = bc.find(c.name);
    if (it == bc.end()) return "missing constraint " + c.name;
    const auto& o = *it->second;
    if (c.sense != o.sense) return "sense differs in " + c.name;
    if (!close(c.rhs, o.rhs)) return "rhs differs in " + c.name;
    if (c.linear.size() != o.linear.size())
      return "linear term count differs in " + c.name;
    for (const auto& [v, coef] : c.linear) {
      auto jt = o.linear.find(v);
      if (jt == o.linear.end() || !close(coef, jt->second))
        return strfmt("coefficient of %s differs in %s", v.c_str(),
                      c.name.c_str());
    }
    if (c.quad.size() != o.quad.size())
      return "quadratic term count differs in " + c.name;
    for (const auto& [vs, coef] : c.quad) {
      auto jt = o.quad.find(vs);
      if (jt == o.quad.end() || !close(coef, jt->second))
        return strfmt("quadratic coefficient of %s*%s differs in %s",
                      vs.first.c_str(), vs.second.c_str(), c.name.c_str());
    }
  }
  return std::nullopt;
}

void export_lp(const MilpInstance& instance, const std::string& path,
               bool linearize, const std::vector<std::string>& comments) {
  write_lp_file(build_lp_model(instance, linearize), path, comments);
}

}  // namespace shardplan

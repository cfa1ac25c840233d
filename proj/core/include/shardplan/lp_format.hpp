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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shardplan/plan.hpp"

namespace shardplan {

/// A mixed-integer model in matrix form, written and read in a CPLEX-LP
/// text dialect. Bilinear binary-times-continuous products (the capacity
/// and cost constraints couple assignment to split) appear as quadratic
/// [ a * b ] terms unless the model was built linearized.
struct LpModel {
  struct Var {
    std::string name;
    double lb = 0.0;
    double ub = 0.0;  // +inf for free above
    bool binary = false;
  };
  struct Constraint {
    std::string name;
    std::map<std::string, double> linear;
    std::map<std::pair<std::string, std::string>, double> quad;  // keys sorted
    char sense = 'L';  // 'L' <=, 'G' >=, 'E' =
    double rhs = 0.0;
  };

  std::map<std::string, double> objective;  // minimized
  std::vector<Constraint> constraints;
  std::vector<Var> vars;

  size_t variable_count() const { return vars.size(); }
};

/// Builds the model with variables p_m_j, x_i_j, mem_j, pct_j, c_m, C.
/// With `linearize` set, every p*mem and p*pct product is replaced by an
/// auxiliary variable with exact big-M bounds, which plain MILP solvers
/// (HiGHS, CBC) accept; the faithful quadratic form needs a solver with
/// bilinear support (Gurobi, SCIP).
LpModel build_lp_model(const MilpInstance& instance, bool linearize = false);

void write_lp_file(const LpModel& model, const std::string& path,
                   const std::vector<std::string>& comments = {});

LpModel parse_lp_file(const std::string& path);

/// Coefficient-wise comparison at tolerance; returns a description of the
/// first mismatch, or nullopt when equivalent.
std::optional<std::string> compare_lp_models(const LpModel& a,
                                             const LpModel& b,
                                             double tol = 1e-12);

/// Convenience: build + write the faithful model for an instance.
void export_lp(const MilpInstance& instance, const std::string& path,
               bool linearize = false,
               const std::vector<std::string>& comments = {});

}  // namespace shardplan

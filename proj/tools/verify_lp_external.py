#!/usr/bin/env python3
# Copyright 2026 The shardplan authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Solves a *linearized* exported model with an independent MILP solver
(HiGHS via scipy) and optionally checks the objective against the value the
built-in solver reported.

Usage:
    shardplan export-lp --config cfg --out out --linearize
    python3 tools/verify_lp_external.py out/model_linearized.lp \
        --expect 1.234e-4 [--rel-tol 1e-6]

The faithful (quadratic) export needs a solver with bilinear support
(Gurobi, SCIP); this script handles the linearized form only.
"""

import argparse
import sys

import numpy as np
from scipy.optimize import LinearConstraint, Bounds, milp


def tokenize(line):
    line = line.split("\\")[0].strip()
    out = []
    cur = ""
    for ch in line:
        if ch in " \t:":
            if cur:
                out.append(cur)
            if ch == ":":
                out.append(":")
            cur = ""
        else:
            cur += ch
    if cur:
        out.append(cur)
    return out


def is_num(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def parse_terms(toks):
    """Yields (coef, var) pairs from a linear expression token stream."""
    sign = 1.0
    i = 0
    while i < len(toks):
        t = toks[i]
        if t == "+":
            sign = 1.0
            i += 1
            continue
        if t == "-":
            sign = -1.0
            i += 1
            continue
        if is_num(t):
            coef = sign * float(t)
            var = toks[i + 1]
            i += 2
        else:
            coef = sign
            var = t
            i += 1
        sign = 1.0
        yield coef, var


def parse_lp(path):
    objective = {}
    constraints = []  # (name, {var: coef}, sense, rhs)
    bounds = {}
    binaries = set()
    section = None
    with open(path) as f:
        for raw in f:
            toks = tokenize(raw)
            if not toks:
                continue
            head = toks[0].lower()
            if head == "minimize":
                section = "obj"
                continue
            if head == "subject":
                section = "con"
                continue
            if head == "bounds":
                section = "bnd"
                continue
            if head in ("binaries", "binary"):
                section = "bin"
                continue
            if head == "end":
                break
            if section == "obj":
                if len(toks) >= 2 and toks[1] == ":":
                    toks = toks[2:]
                for coef, var in parse_terms(toks):
                    objective[var] = objective.get(var, 0.0) + coef
            elif section == "con":
                assert toks[1] == ":", f"constraint without name: {raw}"
                name = toks[0]
                body = toks[2:]
                for si, t in enumerate(body):
                    if t in ("<=", ">=", "="):
                        sense, rhs = t, float(body[si + 1])
                        body = body[:si]
                        break
                if "[" in body:
                    raise SystemExit(
                        "quadratic terms found; export with --linearize")
                terms = {}
                for coef, var in parse_terms(body):
                    terms[var] = terms.get(var, 0.0) + coef
                constraints.append((name, terms, sense, rhs))
            elif section == "bnd":
                if len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
                    bounds[toks[2]] = (float(toks[0]), float(toks[4]))
                elif len(toks) == 3 and toks[1] == ">=":
                    bounds[toks[0]] = (float(toks[2]), np.inf)
                elif len(toks) == 3 and toks[1] == "<=":
                    bounds[toks[0]] = (0.0, float(toks[2]))
            elif section == "bin":
                for t in toks:
                    binaries.add(t)
                    bounds[t] = (0.0, 1.0)
    return objective, constraints, bounds, binaries


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("lp_file")
    ap.add_argument("--expect", type=float, default=None,
                    help="objective reported by the built-in solver")
    ap.add_argument("--rel-tol", type=float, default=1e-6)
    args = ap.parse_args()

    objective, constraints, bounds, binaries = parse_lp(args.lp_file)

    variables = sorted(set(objective)
                       | {v for _, t, _, _ in constraints for v in t}
                       | set(bounds))
    index = {v: i for i, v in enumerate(variables)}
    n = len(variables)

    c = np.zeros(n)
    for v, coef in objective.items():
        c[index[v]] = coef

    rows, lbs, ubs = [], [], []
    for _, terms, sense, rhs in constraints:
        row = np.zeros(n)
        for v, coef in terms.items():
            row[index[v]] = coef
        rows.append(row)
        if sense == "<=":
            lbs.append(-np.inf)
            ubs.append(rhs)
        elif sense == ">=":
            lbs.append(rhs)
            ubs.append(np.inf)
        else:
            lbs.append(rhs)
            ubs.append(rhs)

    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    for v, (l, u) in bounds.items():
        lo[index[v]] = l
        hi[index[v]] = u
    integrality = np.zeros(n)
    for v in binaries:
        integrality[index[v]] = 1

    res = milp(c=c,
               constraints=LinearConstraint(np.vstack(rows), lbs, ubs),
               bounds=Bounds(lo, hi),
               integrality=integrality)
    if not res.success:
        print(f"solver failed: {res.message}", file=sys.stderr)
        return 2
    print(f"external objective: {res.fun:.12e}  ({n} variables, "
          f"{len(constraints)} constraints)")
    if args.expect is not None:
        rel = abs(res.fun - args.expect) / max(1e-300, abs(args.expect))
        if rel > args.rel_tol:
            print(f"MISMATCH: expected {args.expect:.12e}, rel err {rel:.2e}",
                  file=sys.stderr)
            return 1
        print(f"matches expected {args.expect:.12e} (rel err {rel:.2e})")
    return 0


if __name__ == "__main__":
    sys.exit(main())

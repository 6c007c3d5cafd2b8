#!/usr/bin/env python3
"""Solve a free-format MPS file with scipy's MILP interface (HiGHS).

Independent of the C++ reader. Prints a JSON summary on stdout and, with
--out, writes {"variables": {name: value}} for `ptlayout verify`.
"""
import argparse
import json
import math
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp
from scipy.sparse import coo_matrix


def read_mps(path):
    rows, senses, obj_row = [], {}, None
    cols, col_index, integer = [], {}, False
    entries, obj, rhs = [], {}, {}
    lower, upper, binary = {}, {}, set()
    quad = []
    objsense = "MIN"
    section = None
    with open(path) as f:
        for raw in f:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            tok = line.split()
            if not line[0].isspace():
                section = tok[0]
                if section == "ENDATA":
                    break
                continue
            if section == "OBJSENSE":
                objsense = tok[0]
            elif section == "ROWS":
                if tok[0] == "N":
                    obj_row = tok[1]
                else:
                    senses[tok[1]] = tok[0]
                    rows.append(tok[1])
            elif section == "COLUMNS":
                if len(tok) == 3 and tok[1] == "'MARKER'":
                    integer = tok[2] == "'INTORG'"
                    continue
                name = tok[0]
                if name not in col_index:
                    col_index[name] = len(cols)
                    cols.append(name)
                    lower[name], upper[name] = 0.0, math.inf
                    if integer:
                        binary.add(name)
                for k in range(1, len(tok) - 1, 2):
                    if tok[k] == obj_row:
                        obj[name] = obj.get(name, 0.0) + float(tok[k + 1])
                    else:
                        entries.append((tok[k], name, float(tok[k + 1])))
            elif section == "RHS":
                for k in range(1, len(tok) - 1, 2):
                    rhs[tok[k]] = float(tok[k + 1])
            elif section == "BOUNDS":
                kind, name = tok[0], tok[2]
                val = float(tok[3]) if len(tok) > 3 else 0.0
                if kind == "UP":
                    upper[name] = val
                elif kind == "LO":
                    lower[name] = val
                elif kind == "FX":
                    lower[name] = upper[name] = val
                elif kind == "FR":
                    lower[name], upper[name] = -math.inf, math.inf
                elif kind == "MI":
                    lower[name] = -math.inf
                elif kind == "PL":
                    upper[name] = math.inf
                elif kind == "BV":
                    lower[name], upper[name] = 0.0, 1.0
                    binary.add(name)
                else:
                    raise ValueError("unsupported bound " + kind)
            elif section == "QUADOBJ":
                quad.append((tok[0], tok[1], float(tok[2])))
    return dict(rows=rows, senses=senses, cols=cols, col_index=col_index, entries=entries, obj=obj, rhs=rhs,
                lower=lower, upper=upper, binary=binary, quad=quad, objsense=objsense)


def solve(m, time_limit):
    n = len(m["cols"])
    row_index = {r: i for i, r in enumerate(m["rows"])}
    data = [(row_index[r], m["col_index"][c], v) for r, c, v in m["entries"]]
    A = coo_matrix(([v for _, _, v in data], ([i for i, _, _ in data], [j for _, j, _ in data])),
                   shape=(len(m["rows"]), n)).tocsr()
    lo = np.full(len(m["rows"]), -np.inf)
    hi = np.full(len(m["rows"]), np.inf)
    for r, i in row_index.items():
        b = m["rhs"].get(r, 0.0)
        s = m["senses"][r]
        if s in ("L", "E"):
            hi[i] = b
        if s in ("G", "E"):
            lo[i] = b
    c = np.array([m["obj"].get(name, 0.0) for name in m["cols"]])
    integrality = np.array([1 if name in m["binary"] else 0 for name in m["cols"]])
    bounds = Bounds([m["lower"][name] for name in m["cols"]], [m["upper"][name] for name in m["cols"]])
    options = {"mip_rel_gap": 1e-9}
    if time_limit:
        options["time_limit"] = time_limit
    return milp(c, integrality=integrality, bounds=bounds, constraints=LinearConstraint(A, lo, hi), options=options), A


def polish(m, x):
    """Re-solve the continuous part with the binaries fixed at their rounded
    values, at a tighter feasibility tolerance than the MILP search uses."""
    row_index = {r: i for i, r in enumerate(m["rows"])}
    n = len(m["cols"])
    data = [(row_index[r], m["col_index"][c], v) for r, c, v in m["entries"]]
    A = coo_matrix(([v for _, _, v in data], ([i for i, _, _ in data], [j for _, j, _ in data])),
                   shape=(len(m["rows"]), n)).tocsr()
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for r, i in row_index.items():
        b = m["rhs"].get(r, 0.0)
        s = m["senses"][r]
        if s == "E":
            eq_rows.append(A[i])
            eq_rhs.append(b)
        elif s == "L":
            ub_rows.append(A[i])
            ub_rhs.append(b)
        else:
            ub_rows.append(-A[i])
            ub_rhs.append(-b)
    from scipy.sparse import vstack
    bounds = []
    for k, name in enumerate(m["cols"]):
        lo, hi = m["lower"][name], m["upper"][name]
        if name in m["binary"]:
            lo = hi = x[k]
        bounds.append((None if lo == -math.inf else lo, None if hi == math.inf else hi))
    c = np.array([m["obj"].get(name, 0.0) for name in m["cols"]])
    res = linprog(c, A_ub=vstack(ub_rows) if ub_rows else None, b_ub=ub_rhs or None,
                  A_eq=vstack(eq_rows) if eq_rows else None, b_eq=eq_rhs or None, bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    return None if res.x is None else [float(v) for v in res.x]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("mps")
    ap.add_argument("--out", help="write the variable table here")
    ap.add_argument("--time-limit", type=float, default=0.0)
    ap.add_argument("--counts-only", action="store_true", help="only report what the reader saw")
    args = ap.parse_args()

    m = read_mps(args.mps)
    summary = {"variables": len(m["cols"]), "rows": len(m["rows"]), "binaries": len(m["binary"]),
               "objective_sense": m["objsense"], "quadratic_terms": len(m["quad"])}
    if args.counts_only:
        print(json.dumps(summary))
        return 0
    if m["quad"]:
        print(json.dumps(dict(summary, error="quadratic objective is not supported by scipy milp")))
        return 2
    res, _ = solve(m, args.time_limit)
    summary["status"] = int(res.status)
    summary["message"] = res.message
    if res.x is None:
        print(json.dumps(summary))
        return 3
    summary["objective"] = float(res.fun)
    x = [float(v) for v in res.x]
    # HiGHS returns binaries within its own integrality tolerance; snap them.
    for k, name in enumerate(m["cols"]):
        if name in m["binary"]:
            x[k] = float(round(x[k]))
    polished = polish(m, x)
    if polished is not None:
        x = polished
        for k, name in enumerate(m["cols"]):
            if name in m["binary"]:
                x[k] = float(round(x[k]))
    if args.out:
        with open(args.out, "w") as f:
            json.dump({"variables": dict(zip(m["cols"], x))}, f, indent=1)
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())

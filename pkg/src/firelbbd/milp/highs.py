"""In-process backend built on the HiGHS solvers bundled with SciPy.

Without a hook the whole model goes to :func:`scipy.optimize.milp`.
With a hook we run our own best-first branch-and-bound over LP
relaxations (:func:`scipy.optimize.linprog`) so that every integral
candidate can be checked and cut off with lazy rows, which the SciPy
MILP interface cannot do.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp
from scipy.sparse import csr_matrix

from .model import BINARY, BackendResult, IncumbentCallback, Limits, MilpModel

INT_TOL = 1e-6


def _matrix(model: MilpModel, rows=None):
    rows = model.rows if rows is None else rows
    data, ri, ci = [], [], []
    for k, row in enumerate(rows):
        for j, c in row.terms.items():
            ri.append(k)
            ci.append(j)
            data.append(float(c))
    return csr_matrix((data, (ri, ci)), shape=(len(rows), len(model.columns)))


def _row_bounds(rows):
    lo = np.array([float(r.rhs) if r.sense in (">=", "=") else -np.inf for r in rows])
    hi = np.array([float(r.rhs) if r.sense in ("<=", "=") else np.inf for r in rows])
    return lo, hi


def _status_from_milp(res) -> str:
    if res.status == 0:
        return "optimal"
    if res.status == 2:
        return "infeasible"
    if res.status == 1:
        return "feasible" if res.x is not None else "limit"
    return "limit" if res.x is None else "feasible"


def solve_milp(model: MilpModel, limits: Limits | None = None) -> BackendResult:
    """Solve ``model`` exactly (zero MIP gap) with HiGHS."""
    t0 = time.monotonic()
    limits = (limits or Limits()).start()
    c = np.array([float(col.obj) for col in model.columns])
    lb = np.array([float(col.lower) for col in model.columns])
    ub = np.array([float(col.upper) for col in model.columns])
    integrality = np.array([1 if col.kind == BINARY else 0 for col in model.columns])
    constraints = []
    if model.rows:
        lo, hi = _row_bounds(model.rows)
        constraints.append(LinearConstraint(_matrix(model), lo, hi))
    options = {"mip_rel_gap": 0.0, "disp": False}
    if model.metadata.get("presolve") is False:
        options["presolve"] = False
    remaining = limits.remaining()
    if remaining is not None:
        options["time_limit"] = max(remaining, 0.01)
    if limits.node_limit is not None:
        options["node_limit"] = limits.node_limit
    res = milp(c, constraints=constraints, integrality=integrality, bounds=Bounds(lb, ub), options=options)
    status = _status_from_milp(res)
    values = None if res.x is None else [
        float(round(v)) if model.columns[j].kind == BINARY else float(v) for j, v in enumerate(res.x)
    ]
    objective = None if values is None else model.objective_value(values)
    bound = getattr(res, "mip_dual_bound", None)
    if status == "optimal":
        bound = objective
    return BackendResult(
        status, values, objective, None if bound is None or not math.isfinite(bound) else float(bound),
        nodes=int(getattr(res, "mip_node_count", 0) or 0), wall_time=time.monotonic() - t0,
        message=str(res.message),
    )


class HighsBackend:
    name = "highs"
    supports_callback = True

    def solve(self, model: MilpModel, callback: IncumbentCallback | None = None,
              limits: Limits | None = None, start: list | None = None) -> BackendResult:
        if callback is None:
            return solve_milp(model, limits)
        return _branch_and_check(model, callback, (limits or Limits()).start(), start)


def _packing_only(model: MilpModel) -> set[int]:
    """Binaries with zero cost that appear only in grouped packing rows.

    Setting such a column to 0 never breaks feasibility or changes the
    objective, so candidates are cleaned before they reach the hook.
    """
    other = set()
    for row in model.rows:
        if row.group is None:
            other.update(row.terms)
    return {
        j for j, col in enumerate(model.columns)
        if col.kind == BINARY and col.obj == 0 and col.lower == 0 and j not in other
    }


def _branch_and_check(model: MilpModel, callback: IncumbentCallback, limits: Limits,
                      start: list | None) -> BackendResult:
    t0 = time.monotonic()
    cols = model.columns
    n = len(cols)
    c = np.array([float(col.obj) for col in cols])
    base_lb = np.array([float(col.lower) for col in cols])
    base_ub = np.array([float(col.upper) for col in cols])
    bins = np.array([j for j in range(n) if cols[j].kind == BINARY], dtype=int)
    integral = bool(model.metadata.get("integral_objective"))
    cache = {"rows": -1}
    incumbent = {"value": None, "x": None}
    stats = {"nodes": 0, "lps": 0, "callbacks": 0}

    def system():
        if cache["rows"] != len(model.rows):
            ub_rows = [r for r in model.rows if r.sense != "="]
            eq_rows = [r for r in model.rows if r.sense == "="]
            a_ub = _matrix(model, ub_rows)
            sign = np.array([1.0 if r.sense == "<=" else -1.0 for r in ub_rows])
            cache["A_ub"] = a_ub.multiply(sign[:, None]).tocsr() if ub_rows else None
            cache["b_ub"] = np.array([s * float(r.rhs) for s, r in zip(sign, ub_rows)]) if ub_rows else None
            cache["A_eq"] = _matrix(model, eq_rows) if eq_rows else None
            cache["b_eq"] = np.array([float(r.rhs) for r in eq_rows]) if eq_rows else None
            cache["rows"] = len(model.rows)
            cache["clean"] = _packing_only(model)
        return cache

    def lp(lb, ub):
        s = system()
        stats["lps"] += 1
        options = {"presolve": False}
        remaining = limits.remaining()
        if remaining is not None:
            options["time_limit"] = max(remaining, 0.01)
        res = linprog(
            c, A_ub=s["A_ub"], b_ub=s["b_ub"], A_eq=s["A_eq"], b_eq=s["b_eq"],
            bounds=np.column_stack([lb, ub]), method="highs-ds", options=options,
        )
        if res.status == 2:
            return None
        if res.status != 0:
            raise TimeoutError(res.message)
        return res

    def prunable(bound) -> bool:
        best = incumbent["value"]
        if best is None:
            return False
        if integral:
            return bound > best - 1 + INT_TOL
        return bound >= best - INT_TOL

    def candidate(x):
        """Round an integral LP point, clean it and hand it to the hook."""
        x = list(x)
        for j in bins:
            x[j] = 0.0 if j in system()["clean"] else float(round(x[j]))
        value = model.objective_value(x)
        if incumbent["value"] is not None and value >= incumbent["value"] - INT_TOL:
            return True
        stats["callbacks"] += 1
        rows = callback(x)
        if rows:
            model.rows.extend(rows)
            return False
        incumbent["value"] = round(value) if integral else value
        incumbent["x"] = x
        return True

    def is_integral(x) -> bool:
        return bool(np.all(np.abs(x[bins] - np.round(x[bins])) <= INT_TOL)) if len(bins) else True

    status = None
    heap = []
    seq = itertools.count()
    current = -np.inf
    try:
        if start is not None:
            lb, ub = base_lb.copy(), base_ub.copy()
            lb[bins] = ub[bins] = np.round(np.asarray(start, dtype=float)[bins])
            while True:
                res = lp(lb, ub)
                if res is None or candidate(res.x):
                    break
        heapq.heappush(heap, (-np.inf, 0, next(seq), base_lb.copy(), base_ub.copy()))
        while heap:
            if limits.expired() or (limits.node_limit is not None and stats["nodes"] >= limits.node_limit):
                status = "limit"
                break
            parent_bound, negdepth, _, lb, ub = heapq.heappop(heap)
            if prunable(parent_bound):
                continue
            current = parent_bound
            stats["nodes"] += 1
            while True:
                res = lp(lb, ub)
                if res is None or prunable(res.fun):
                    res = None
                    break
                if not is_integral(res.x):
                    break
                if candidate(res.x):
                    res = None
                    break
            if res is None:
                continue
            frac = np.abs(res.x[bins] - np.round(res.x[bins]))
            j = int(bins[int(np.argmax(frac))])
            for v in (1.0, 0.0):
                clb, cub = lb.copy(), ub.copy()
                clb[j] = cub[j] = v
                heapq.heappush(heap, (res.fun, negdepth - 1, next(seq), clb, cub))
    except TimeoutError:
        status = "limit"
        heap.append((current, 0, 0, None, None))

    wall = time.monotonic() - t0
    value, x = incumbent["value"], incumbent["x"]
    if status == "limit":
        open_bound = min((h[0] for h in heap), default=value)
        if open_bound is not None and value is not None:
            open_bound = min(open_bound, value)
        if open_bound is not None and not math.isfinite(open_bound):
            open_bound = None
        return BackendResult("feasible" if value is not None else "limit", x, value, open_bound,
                             nodes=stats["nodes"], iterations=stats["callbacks"], wall_time=wall,
                             message="limit reached")
    if value is None:
        return BackendResult("infeasible", nodes=stats["nodes"], iterations=stats["callbacks"], wall_time=wall)
    return BackendResult("optimal", x, value, value, nodes=stats["nodes"],
                         iterations=stats["callbacks"], wall_time=wall)

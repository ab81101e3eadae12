"""Exact combinatorial branch-and-bound for Benders master problems.

The backend handles models whose continuous columns are "estimators":
each continuous column appears with a non-negative objective coefficient
and only in rows of the form ``b * theta + a . z >= rhs`` (``b > 0``, one
continuous column per row, every other column binary). Given a binary
assignment the optimal estimator value is then

    theta = max(lower, max_k (rhs_k - a_k . z) / b_k),

so no LP relaxation is needed and all arithmetic stays exact. Anything
else raises :class:`NeedsExternalBackend`.

Node bounds assume every free binary may be set to 1, except that rows
tagged with a common ``group`` (disjoint unit packing rows such as
per-period capacity or one-resource-per-node) cap how many free variables
of each cut can be switched on.
"""

from __future__ import annotations

import heapq
import itertools
import time
from fractions import Fraction

from .model import (
    BINARY,
    BackendResult,
    IncumbentCallback,
    Limits,
    MilpModel,
    ModelError,
    NeedsExternalBackend,
    Row,
)

FREE = 2


def _div(a, b):
    if b == 1:
        return a
    q = Fraction(a) / Fraction(b)
    return q.numerator if q.denominator == 1 else q


class _Structure:
    """Normalised view of the model, extended in place as lazy rows arrive."""

    def __init__(self, model: MilpModel):
        self.model = model
        self.is_bin = [c.kind == BINARY for c in model.columns]
        self.est_rows: dict[int, list[tuple]] = {}  # continuous col -> [(b, rhs, terms)]
        self.bin_rows: list[tuple] = []  # (terms, lo, hi); lo/hi may be None
        self.groups: dict[str, list[tuple]] = {}  # group -> [(member set, rhs)]
        self.group_of: dict[str, dict[int, int]] = {}  # group -> col -> member index
        for j, c in enumerate(model.columns):
            if c.kind != BINARY:
                if c.obj < 0:
                    raise NeedsExternalBackend(f"continuous column {c.name!r} has a negative cost")
                self.est_rows[j] = []
            elif c.lower not in (0, 1) or c.upper not in (0, 1):
                raise ModelError(f"binary column {c.name!r} has non-binary bounds")
        for row in model.rows:
            self.add(row)

    def add(self, row: Row) -> None:
        cont = [j for j in row.terms if not self.is_bin[j]]
        if not cont:
            lo = row.rhs if row.sense in (">=", "=") else None
            hi = row.rhs if row.sense in ("<=", "=") else None
            self.bin_rows.append((dict(row.terms), lo, hi))
            if row.group is not None:
                self._add_group(row)
            return
        if len(cont) > 1 or row.sense == "=":
            raise NeedsExternalBackend(f"row {row.name!r} couples continuous columns")
        j = cont[0]
        b = row.terms[j]
        sign = 1 if row.sense == ">=" else -1
        b *= sign
        if b <= 0:
            raise NeedsExternalBackend(f"row {row.name!r} bounds its estimator from above")
        terms = {k: sign * c for k, c in row.terms.items() if k != j}
        self.est_rows[j].append((b, sign * row.rhs, terms))

    def _add_group(self, row: Row) -> None:
        if row.sense != "<=" or any(c != 1 for c in row.terms.values()):
            raise ModelError(f"grouped row {row.name!r} must be a unit packing row")
        members = self.group_of.setdefault(row.group, {})
        rows = self.groups.setdefault(row.group, [])
        for j in row.terms:
            if j in members:
                raise ModelError(f"group {row.group!r} rows overlap on column {j}")
            members[j] = len(rows)
        rows.append((frozenset(row.terms), row.rhs))


class ReferenceBackend:
    """Best-first branch-and-bound with an optional incumbent (lazy-row) hook."""

    name = "reference"
    supports_callback = True

    def solve(
        self,
        model: MilpModel,
        callback: IncumbentCallback | None = None,
        limits: Limits | None = None,
        start: list | None = None,
    ) -> BackendResult:
        t0 = time.monotonic()
        limits = (limits or Limits()).start()
        s = _Structure(model)
        cols = model.columns
        n_cols = len(cols)
        bins = [j for j in range(n_cols) if s.is_bin[j]]
        integral = bool(model.metadata.get("integral_objective"))
        seq = itertools.count()
        stats = {"nodes": 0, "callbacks": 0}
        incumbent: list = [None, None]  # value, x

        def root_fix():
            fix = bytearray([FREE]) * n_cols
            for j in bins:
                if cols[j].lower == cols[j].upper:
                    fix[j] = int(cols[j].lower)
            return fix

        def prunable(bound) -> bool:
            best = incumbent[0]
            if best is None:
                return False
            if integral:
                return bound > best - 1
            return bound >= best

        def row_possible(terms, lo, hi, fix) -> bool:
            fixed_act = mn = mx = 0
            for j, c in terms.items():
                v = fix[j]
                if v == FREE:
                    if c > 0:
                        mx += c
                    else:
                        mn += c
                elif v:
                    fixed_act += c
            if lo is not None and fixed_act + mx < lo:
                return False
            if hi is not None and fixed_act + mn > hi:
                return False
            return True

        def residuals(fix):
            res = {}
            for g, rows in s.groups.items():
                res[g] = [rhs - sum(1 for j in members if fix[j] == 1) for members, rhs in rows]
            return res

        def max_free_activity(terms, fix, res):
            free_pos = [(j, c) for j, c in terms.items() if fix[j] == FREE and c > 0]
            best = sum(c for _, c in free_pos)
            for g, members in s.group_of.items():
                per_row: dict[int, list] = {}
                outside = 0
                for j, c in free_pos:
                    m = members.get(j)
                    if m is None:
                        outside += c
                    else:
                        per_row.setdefault(m, []).append(c)
                total = outside
                for m, coefs in per_row.items():
                    k = max(res[g][m], 0)
                    coefs.sort(reverse=True)
                    total += sum(coefs[:k])
                best = min(best, total)
            return best

        def assess(fix):
            """Bound, zero-completion value (or None), candidate x and branching masses."""
            for terms, lo, hi in s.bin_rows:
                if not row_possible(terms, lo, hi, fix):
                    return None
            res = residuals(fix)
            bound = 0
            zero_val = 0
            x = [0] * n_cols
            mass: dict[int, Fraction | int] = {}
            for j in bins:
                x[j] = 1 if fix[j] == 1 else 0
                c = cols[j].obj
                if c:
                    bound += c * x[j] + (min(c, 0) if fix[j] == FREE else 0)
                    zero_val += c * x[j]
                    if c < 0 and fix[j] == FREE:
                        mass[j] = mass.get(j, 0) - c
            for k, rows in s.est_rows.items():
                col = cols[k]
                lo_bound = col.lower
                zero_theta = col.lower
                binding = []
                for b, rhs, terms in rows:
                    fixed_act = sum(c for j, c in terms.items() if fix[j] == 1)
                    v0 = _div(rhs - fixed_act, b)
                    if v0 > zero_theta:
                        zero_theta, binding = v0, [(b, terms)]
                    elif v0 == zero_theta and v0 > col.lower:
                        binding.append((b, terms))
                    v = _div(rhs - fixed_act - max_free_activity(terms, fix, res), b)
                    if v > lo_bound:
                        lo_bound = v
                if lo_bound > col.upper:
                    return None
                bound += col.obj * lo_bound
                x[k] = zero_theta
                if zero_theta > col.upper:
                    zero_val = None
                elif zero_val is not None:
                    zero_val += col.obj * zero_theta
                if col.obj and zero_theta > lo_bound:
                    for b, terms in binding:
                        for j, c in terms.items():
                            if fix[j] == FREE and c > 0:
                                mass[j] = mass.get(j, 0) + _div(c * col.obj, b)
            if zero_val is not None:
                for terms, lo, hi in s.bin_rows:
                    act = sum(c for j, c in terms.items() if fix[j] == 1)
                    if (lo is not None and act < lo) or (hi is not None and act > hi):
                        zero_val = None
                        if lo is not None and act < lo:
                            for j, c in terms.items():
                                if fix[j] == FREE and c > 0:
                                    mass[j] = mass.get(j, 0) + c
            return bound, zero_val, x, mass

        def offer(x, value) -> bool:
            """Run the hook on a candidate; True when it was accepted."""
            if incumbent[0] is not None and value >= incumbent[0]:
                return True
            if callback is not None:
                stats["callbacks"] += 1
                rows = callback(list(x))
                if rows:
                    for row in rows:
                        model.rows.append(row)
                        s.add(row)
                    return False
            incumbent[0], incumbent[1] = value, list(x)
            return True

        if start is not None:
            fix = root_fix()
            for j in bins:
                fix[j] = int(round(start[j]))
            while True:
                a = assess(fix)
                if a is None or a[1] is None:
                    break
                if offer(a[2], a[1]):
                    break

        heap = []
        fix0 = root_fix()
        a0 = assess(fix0)
        if a0 is not None:
            heapq.heappush(heap, (a0[0], 0, next(seq), bytes(fix0)))
        status = None
        while heap:
            if limits.expired() or (limits.node_limit is not None and stats["nodes"] >= limits.node_limit):
                status = "limit"
                break
            _, negdepth, _, key = heapq.heappop(heap)
            fix = bytearray(key)
            stats["nodes"] += 1
            while True:
                a = assess(fix)
                if a is None:
                    break
                bound, zero_val, x, mass = a
                if prunable(bound):
                    a = None
                    break
                if zero_val is None or offer(x, zero_val):
                    break
            if a is None:
                continue
            bound, zero_val, x, mass = a
            if prunable(bound) or not mass:
                continue
            j = min(mass, key=lambda k: (-mass[k], k))
            for v in (1, 0):
                child = bytearray(fix)
                child[j] = v
                ca = assess(child)
                if ca is not None and not prunable(ca[0]):
                    heapq.heappush(heap, (ca[0], negdepth - 1, next(seq), bytes(child)))

        wall = time.monotonic() - t0
        value, x = incumbent
        if status == "limit":
            open_bound = min((h[0] for h in heap), default=value)
            if value is not None and open_bound is not None:
                open_bound = min(open_bound, value)
            return BackendResult(
                "feasible" if value is not None else "limit", x, value, open_bound,
                nodes=stats["nodes"], iterations=stats["callbacks"], wall_time=wall,
                message="limit reached",
            )
        if value is None:
            return BackendResult("infeasible", nodes=stats["nodes"], iterations=stats["callbacks"], wall_time=wall)
        return BackendResult(
            "optimal", x, value, value, nodes=stats["nodes"], iterations=stats["callbacks"], wall_time=wall,
        )


def solve_reference(model: MilpModel, callback: IncumbentCallback | None = None,
                    limits: Limits | None = None, start: list | None = None) -> BackendResult:
    return ReferenceBackend().solve(model, callback, limits, start)

"""Logic-based Benders decomposition for resource interdiction.

The master problem chooses placements ``z`` and estimators ``theta_n``
for every node the fire reaches before ``psi`` with no interdiction. The
subproblem is one shortest-path computation (:func:`firedyn.evaluate`).
Cuts are stored multiplied through by their denominator so every row of
the master has integer coefficients:

* optimality: ``R * theta_n + sum(z over window) >= R``
* feasibility: ``sum(z over window) - Q * z_anchor >= 0``
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .firedyn import FireDynamics, InterdictionPlan, evaluate, objective
from .instance import Instance
from .milp import (
    BINARY,
    CONTINUOUS,
    BackendFailure,
    BackendResult,
    Limits,
    MilpModel,
    Row,
    get_backend,
)

log = logging.getLogger(__name__)

THETA_TOL = 1e-6
# "wide": window widened by (R-1) delays and coefficient 1/R; "unit": single delay, coefficient 1
WINDOWS = ("wide", "unit")


def _ceil_div(num, den) -> int:
    return -((-num) // den)


def resilience(instance: Instance, arrivals, n: int) -> int:
    """Fewest extra delays that push node ``n`` past ``psi``."""
    d = arrivals[n]
    if not d < instance.psi:
        raise ValueError(f"node {n} is already protected (arrival {d} >= psi {instance.psi})")
    return int(_ceil_div(instance.psi - d, instance.delta))


def infeasibility_depth(instance: Instance, arrivals, n: int, t) -> int:
    """Fewest extra delays that make a resource at ``n`` in period ``t`` legal."""
    d = arrivals[n]
    if not d < t:
        raise ValueError(f"no violation at node {n}: fire arrives at {d}, resource at {t}")
    return int(_ceil_div(t - d, instance.delta))


@dataclass(frozen=True)
class BendersCut:
    """A cut with every coefficient equal to ``1/scale``.

    ``optimality``: ``theta_target >= 1 - sum(z[v, t] for v, t in terms) / scale``.
    ``feasibility``: ``1 - z[anchor] + sum(z[v, t] for v, t in terms) / scale >= 1``.
    """

    kind: str
    target: int
    scale: int
    terms: tuple  # sorted (node, period) pairs
    anchor: tuple | None = None
    source: str = ""
    origin: frozenset = field(default=frozenset(), compare=False)  # placements of the generating plan

    @property
    def coefficients(self) -> dict:
        return {p: Fraction(1, self.scale) for p in self.terms}

    @property
    def constant(self) -> Fraction:
        return Fraction(1)

    def key(self) -> tuple:
        return (self.kind, self.target, self.anchor, self.terms, self.scale)

    def hits(self, plan: InterdictionPlan) -> int:
        return sum(1 for p in self.terms if p in plan.placements)

    def bound(self, plan: InterdictionPlan) -> Fraction:
        """Right-hand side of an optimality cut at ``plan``."""
        return 1 - Fraction(self.hits(plan), self.scale)

    def satisfied(self, plan: InterdictionPlan, theta=None) -> bool:
        if self.kind == "feasibility":
            return self.hits(plan) >= self.scale * int(self.anchor in plan.placements)
        return theta >= self.bound(plan)

    def to_line(self) -> str:
        terms = ",".join(f"{n}@{t}" for n, t in self.terms)
        anchor = f" anchor={self.anchor[0]}@{self.anchor[1]}" if self.anchor else ""
        return f"{self.kind} target={self.target}{anchor} scale={self.scale} terms={terms}"


def _window_terms(instance: Instance, plan: InterdictionPlan, interior: Iterable[int], limit_of) -> tuple:
    cand = set(instance.candidate_nodes())
    out = []
    for v in interior:
        if v not in cand:
            continue
        limit = limit_of(v)
        for t in instance.periods:
            if t <= limit and (v, t) not in plan.placements:
                out.append((v, t))
    return tuple(sorted(out))


def optimality_cut(instance: Instance, plan: InterdictionPlan, dyn: FireDynamics, n: int,
                   window: str = "wide", source: str = "") -> BendersCut:
    """Cut saying ``n`` stays unprotected until enough new delays land on its fire path."""
    if n not in dyn.unprotected:
        raise ValueError(f"node {n} is protected under this plan")
    r = resilience(instance, dyn.arrivals, n) if window == "wide" else 1
    widen = (r - 1) * instance.delta
    terms = _window_terms(instance, plan, dyn.interior(n), lambda v: dyn.arrivals[v] + widen)
    return BendersCut("optimality", n, r, terms, None, source, plan.placements)


def feasibility_cut(instance: Instance, plan: InterdictionPlan, dyn: FireDynamics, n: int, t,
                    source: str = "") -> BendersCut:
    """Cut forbidding the resource at ``(n, t)`` unless enough new delays reach its fire path."""
    if (n, t) not in dyn.violations:
        raise ValueError(f"no violation at ({n}, {t})")
    q = infeasibility_depth(instance, dyn.arrivals, n, t)
    limit = dyn.arrivals[n] + (q - 1) * instance.delta
    terms = _window_terms(instance, plan, dyn.interior(n), lambda v: limit)
    return BendersCut("feasibility", n, q, terms, (n, t), source, plan.placements)


def initial_cuts(instance: Instance, window: str = "wide") -> list[BendersCut]:
    empty = InterdictionPlan()
    dyn = evaluate(instance, empty)
    return [optimality_cut(instance, empty, dyn, n, window, "z=0") for n in sorted(dyn.unprotected)]


@dataclass
class CutStats:
    optimality_count: int = 0
    feasibility_count: int = 0
    iterations: int = 0
    master_solves: int = 0
    callbacks: int = 0
    subproblem_time: float = 0.0
    master_time: float = 0.0


@dataclass
class SolveReport:
    instance_id: str
    method: str
    status: str  # optimal | feasible | limit
    objective: int | None
    bound: float | None
    plan: InterdictionPlan | None
    stats: CutStats = field(default_factory=CutStats)
    wall_time: float = 0.0
    bound_history: list = field(default_factory=list)
    cuts: list = field(default_factory=list)

    @property
    def proven_optimal(self) -> bool:
        return self.status == "optimal"


class MasterProblem:
    """Master MILP plus the cut pool that generated its rows."""

    def __init__(self, instance: Instance, capacity: Mapping | None = None, fixed: Mapping | None = None):
        self.instance = instance
        self.model = MilpModel(metadata={"instance": instance.id, "formulation": "lbbd-master"})
        capacity = instance.capacity if capacity is None else capacity
        self.z: dict[tuple, int] = {}
        self.zkey: dict[int, tuple] = {}
        for n in instance.candidate_nodes():
            for t in instance.periods:
                j = self.model.add_column(f"z_{n}_{str(t).replace('/', '_')}", BINARY)
                self.z[n, t] = j
                self.zkey[j] = (n, t)
        base = evaluate(instance, InterdictionPlan())
        self.tracked = sorted(base.unprotected)
        self.theta = {n: self.model.add_column(f"theta_{n}", CONTINUOUS, 0, 1, obj=1) for n in self.tracked}
        for t in instance.periods:
            self.model.add_row(f"cap_{t}", "<=", capacity.get(t, 0),
                               {self.z[n, t]: 1 for n in instance.candidate_nodes()}, group="capacity")
        for n in instance.candidate_nodes():
            self.model.add_row(f"once_{n}", "<=", 1, {self.z[n, t]: 1 for t in instance.periods}, group="unique")
        self.fixed = dict(fixed or {})
        for p, v in self.fixed.items():
            col = self.model.columns[self.z[p]]
            col.lower = col.upper = int(v)
        self.pool: list[BendersCut] = []
        self._keys: set = set()
        self.covered: set[int] = set()

    def row(self, cut: BendersCut) -> Row:
        terms = {self.z[p]: 1 for p in cut.terms}
        if cut.kind == "optimality":
            terms[self.theta[cut.target]] = cut.scale
            return Row(f"opt_{len(self.pool)}", ">=", cut.scale, terms)
        terms[self.z[cut.anchor]] = terms.get(self.z[cut.anchor], 0) - cut.scale
        return Row(f"feas_{len(self.pool)}", ">=", 0, terms)

    def register(self, cut: BendersCut) -> Row | None:
        """Record ``cut`` in the pool; returns its row, or None for a duplicate."""
        key = cut.key()
        if key in self._keys:
            return None
        self._keys.add(key)
        row = self.row(cut)
        self.pool.append(cut)
        self.covered.update(j for j in row.terms if j in self.zkey)
        return row

    def add_cut(self, cut: BendersCut) -> bool:
        row = self.register(cut)
        if row is None:
            return False
        self.model.rows.append(row)
        return True

    def fix_uncovered(self) -> None:
        """Pin free placement columns that no cut mentions to zero (they cannot lower the objective)."""
        for j, p in self.zkey.items():
            if p in self.fixed:
                continue
            self.model.columns[j].upper = 1 if j in self.covered else 0

    def decode(self, values) -> tuple[InterdictionPlan, dict]:
        plan = InterdictionPlan(p for j, p in self.zkey.items() if values[j] > 0.5)
        theta = {n: values[j] for n, j in self.theta.items()}
        return plan, theta

    def encode(self, plan: InterdictionPlan) -> list:
        x = [0.0] * len(self.model.columns)
        for p in plan.placements:
            x[self.z[p]] = 1.0
        return x


class LBBDSolver:
    """One LBBD run. Most callers want :func:`solve_lbbd`."""

    def __init__(self, instance: Instance, backend="highs", window: str = "wide",
                 capacity: Mapping | None = None, fixed: Mapping | None = None,
                 seed_cuts: Iterable[BendersCut] = ()):
        self.instance = instance
        self.backend = get_backend(backend) if isinstance(backend, str) else backend
        self.window = window
        self.master = MasterProblem(instance, capacity, fixed)
        self.stats = CutStats()
        self.best_plan: InterdictionPlan | None = None
        self.best_value: int | None = None
        self._plans = 0
        for cut in initial_cuts(instance, window):
            self.master.add_cut(cut)
        for cut in seed_cuts:
            self.master.add_cut(cut)

    def _record(self, plan: InterdictionPlan, dyn: FireDynamics) -> None:
        obj = objective(dyn)
        if obj.feasible and (self.best_value is None or obj.value < self.best_value):
            self.best_plan, self.best_value = plan, obj.value

    def generate(self, plan: InterdictionPlan, theta: Mapping) -> list[BendersCut]:
        """Evaluate ``plan`` once and return the cuts it violates."""
        t0 = time.monotonic()
        dyn = evaluate(self.instance, plan)
        self._plans += 1
        source = f"plan{self._plans}"
        cuts = []
        for n, t in sorted(dyn.violations):
            cuts.append(feasibility_cut(self.instance, plan, dyn, n, t, source))
        for n in self.master.tracked:
            if n in dyn.unprotected and theta.get(n, 0) < 1 - THETA_TOL:
                cuts.append(optimality_cut(self.instance, plan, dyn, n, self.window, source))
        self._record(plan, dyn)
        self.stats.subproblem_time += time.monotonic() - t0
        return cuts

    def _count(self, cut: BendersCut) -> None:
        if cut.kind == "optimality":
            self.stats.optimality_count += 1
        else:
            self.stats.feasibility_count += 1

    def callback(self, values) -> list[Row]:
        """Incumbent hook for branch-and-check backends."""
        self.stats.callbacks += 1
        plan, theta = self.master.decode(values)
        rows = []
        for cut in self.generate(plan, theta):
            row = self.master.register(cut)
            if row is not None:
                self._count(cut)
            rows.append(row if row is not None else self.master.row(cut))
        return rows

    def _warm(self, plan: InterdictionPlan | None) -> None:
        # the fixed placements alone form a feasible plan (they came from an earlier feasible stage)
        base = InterdictionPlan(p for p, v in self.master.fixed.items() if v)
        self._record(base, evaluate(self.instance, base))
        if plan is not None:
            plan.validate(self.instance)
            for cut in self.generate(plan, {}):
                if self.master.add_cut(cut):
                    self._count(cut)

    def run_iterative(self, warm_start=None, limits: Limits | None = None) -> SolveReport:
        limits = (limits or Limits()).start()
        t0 = time.monotonic()
        history = []
        self._warm(warm_start)
        lower = 0
        status = "limit"
        while True:
            if limits.expired():
                break
            self.master.fix_uncovered()
            t1 = time.monotonic()
            res = self.backend.solve(self.master.model, limits=Limits(limits.remaining()))
            self.stats.master_time += time.monotonic() - t1
            self.stats.master_solves += 1
            self.stats.iterations += 1
            if res.status not in ("optimal",):
                if res.status == "infeasible":
                    raise BackendFailure("master problem infeasible", res)
                if res.bound is not None:
                    lower = max(lower, math.ceil(res.bound - THETA_TOL))
                break
            history.append(res.objective)
            lower = max(lower, math.ceil(res.objective - THETA_TOL))
            if self.best_value is not None and lower >= self.best_value:
                status = "optimal"
                break
            plan, theta = self.master.decode(res.values)
            cuts = self.generate(plan, theta)
            if not cuts:
                status = "optimal"
                break
            added = 0
            for cut in cuts:
                if self.master.add_cut(cut):
                    self._count(cut)
                    added += 1
            if not added:
                raise BackendFailure("cut generation stalled: every cut was already in the pool", res)
        return self._report("iterative", status, lower, history, time.monotonic() - t0)

    def run_branch_and_check(self, warm_start=None, limits: Limits | None = None) -> SolveReport:
        limits = (limits or Limits()).start()
        t0 = time.monotonic()
        self._warm(warm_start)
        model = self.master.model
        model.metadata["integral_objective"] = True
        start = None if self.best_plan is None else self.master.encode(self.best_plan)
        t1, sub0 = time.monotonic(), self.stats.subproblem_time
        res: BackendResult = self.backend.solve(model, callback=self.callback, limits=limits, start=start)
        self.stats.master_time += time.monotonic() - t1 - (self.stats.subproblem_time - sub0)
        self.stats.master_solves += 1
        self.stats.iterations = self.stats.callbacks
        if res.status == "infeasible":
            raise BackendFailure("master problem infeasible", res)
        if res.status == "optimal":
            plan, _ = self.master.decode(res.values)
            self._record(plan, evaluate(self.instance, plan))
            status = "optimal"
            lower = self.best_value
        else:
            status = "limit"
            lower = 0 if res.bound is None else math.ceil(res.bound - THETA_TOL)
        return self._report("branch_and_check", status, lower, [] if lower is None else [lower], time.monotonic() - t0)

    def _report(self, mode, status, lower, history, wall) -> SolveReport:
        value = self.best_value
        if status == "optimal":
            lower = value
        elif value is not None and lower is not None and lower >= value:
            status, lower = "optimal", value
        else:
            status = "feasible" if value is not None else "limit"
        return SolveReport(
            self.instance.id, f"lbbd-{mode}", status, value, lower, self.best_plan,
            self.stats, wall, history, list(self.master.pool),
        )


def solve_lbbd(instance: Instance, mode: str = "branch_and_check", backend="highs", warm_start=None,
               time_limit: float | None = None, window: str = "wide", capacity: Mapping | None = None,
               fixed: Mapping | None = None, seed_cuts: Iterable[BendersCut] = ()) -> SolveReport:
    """Solve to proven optimality (or until ``time_limit``) with LBBD.

    ``mode`` is ``iterative`` (re-solve the master to optimality each
    round) or ``branch_and_check`` (one master search with lazy cuts at
    integral incumbents). ``capacity`` and ``fixed`` restrict the master
    (used by :func:`greedy`); ``seed_cuts`` are extra valid cuts.
    """
    if window not in WINDOWS:
        raise ValueError(f"window must be one of {WINDOWS}")
    solver = LBBDSolver(instance, backend, window, capacity, fixed, seed_cuts)
    limits = Limits(time_limit)
    if mode == "iterative":
        return solver.run_iterative(warm_start, limits)
    if mode == "branch_and_check":
        return solver.run_branch_and_check(warm_start, limits)
    raise ValueError(f"unknown mode {mode!r}")


def greedy(instance: Instance, backend="highs", mode: str = "branch_and_check", window: str = "wide",
           time_limit: float | None = None) -> SolveReport:
    """Rolling-horizon heuristic: settle one period at a time, ignoring later resources."""
    t0 = time.monotonic()
    limits = Limits(time_limit).start()
    fixed: dict = {}
    pool: list[BendersCut] = []
    stats = CutStats()
    last = None
    for k, t in enumerate(instance.periods):
        capacity = {s: (instance.capacity[s] if s <= t else 0) for s in instance.periods}
        remaining = limits.remaining()
        share = None if remaining is None else remaining / (len(instance.periods) - k)
        rep = solve_lbbd(instance, mode, backend, time_limit=share, window=window,
                         capacity=capacity, fixed=fixed, seed_cuts=pool)
        if rep.plan is None:
            raise BackendFailure(f"greedy stage {t} found no feasible plan")
        chosen = rep.plan.placements
        for n in instance.candidate_nodes():
            fixed[n, t] = int((n, t) in chosen)
        pool = rep.cuts
        stats.optimality_count += rep.stats.optimality_count
        stats.feasibility_count += rep.stats.feasibility_count
        stats.iterations += rep.stats.iterations
        stats.master_solves += rep.stats.master_solves
        stats.callbacks += rep.stats.callbacks
        stats.master_time += rep.stats.master_time
        stats.subproblem_time += rep.stats.subproblem_time
        last = rep
    plan = InterdictionPlan(p for p, v in fixed.items() if v)
    value = objective(evaluate(instance, plan)).value
    status = "feasible"
    return SolveReport(instance.id, "lbbd-greedy", status, value, None, plan, stats,
                       time.monotonic() - t0, [], pool if last else [])


def write_cut_pool(cuts: Iterable[BendersCut], path) -> None:
    """One cut per line in the ``BendersCut.to_line`` form."""
    Path(path).write_text("".join(c.to_line() + "\n" for c in cuts))


def read_cut_pool(path) -> list[BendersCut]:
    cuts = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        kind, *fields = line.split(" ")
        d = dict(f.split("=", 1) for f in fields)

        def pair(s):
            n, t = s.split("@")
            return int(n), Fraction(t) if "/" in t else int(t)

        terms = tuple(pair(s) for s in d["terms"].split(",") if s)
        anchor = pair(d["anchor"]) if "anchor" in d else None
        cuts.append(BendersCut(kind, int(d["target"]), int(d["scale"]), terms, anchor))
    return cuts

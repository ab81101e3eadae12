"""Run records, solution files and the method dispatcher shared by solve and bench."""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .. import instance as inst_io
from ..firedyn import InterdictionPlan, brute_force
from ..instance import Instance, preprocess
from ..lbbd import SolveReport, greedy, solve_lbbd, write_cut_pool
from ..milp import ExternalConfig, Limits, build_direct_mip, get_backend, plan_from_values, verify_solution

RECORD_SCHEMA = 1
SOLUTION_SCHEMA = 1
METHODS = ("lbbd-exact", "lbbd-greedy", "mip-direct", "brute-force")


def default_time_limit() -> float | None:
    raw = os.environ.get("FIRELBBD_TIME_LIMIT")
    return float(raw) if raw else None


@dataclass
class RunConfig:
    method: str = "lbbd-exact"
    mode: str = "branch_and_check"
    backend: str = "highs"
    warm_start: str | None = None
    window: str = "wide"
    time_limit: float | None = None
    preprocess: bool = False

    def key(self) -> dict:
        return asdict(self)


@dataclass
class RunRecord:
    instance: str
    method: str
    status: str
    objective: int | None
    lower_bound: float | None
    wall_time: float
    opt_cuts: int = 0
    feas_cuts: int = 0
    iterations: int = 0
    nodes: int = 0
    seed: int | None = None
    config_hash: str = ""
    config: dict = field(default_factory=dict)
    label: str = ""
    schema_version: int = RECORD_SCHEMA

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        return cls(**json.loads(line))


def config_hash(instance: Instance, config: RunConfig) -> str:
    h = hashlib.sha256()
    h.update(inst_io.dumps(instance).encode())
    h.update(json.dumps(config.key(), sort_keys=True).encode())
    return h.hexdigest()[:16]


def _period_out(t):
    return str(t) if isinstance(t, Fraction) else t


def _period_in(t):
    return Fraction(t) if isinstance(t, str) else t


def write_solution(path, instance: Instance, plan: InterdictionPlan, objective, method: str) -> None:
    doc = {
        "schema_version": SOLUTION_SCHEMA,
        "instance": instance.id,
        "method": method,
        "objective": objective,
        "placements": [[n, _period_out(t)] for n, t in sorted(plan.placements)],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def read_solution(path) -> tuple[InterdictionPlan, dict]:
    doc = json.loads(Path(path).read_text())
    if "placements" not in doc:
        raise ValueError(f"{path}: solution file has no 'placements'")
    return InterdictionPlan((int(n), _period_in(t)) for n, t in doc["placements"]), doc


@dataclass
class RunOutcome:
    record: RunRecord
    plan: InterdictionPlan | None
    report: SolveReport | None = None


def _lift(plan: InterdictionPlan | None, node_map: dict | None) -> InterdictionPlan | None:
    """Translate a plan on the pre-processed instance back to original ids."""
    if plan is None or node_map is None:
        return plan
    back = {new: old for old, new in node_map.items()}
    return InterdictionPlan((back[n], t) for n, t in plan.placements)


def run_method(instance: Instance, config: RunConfig, seed: int | None = None,
               external: ExternalConfig | None = None, cut_pool: str | None = None) -> RunOutcome:
    """Run one pipeline; the returned plan always uses the original node ids."""
    if config.method not in METHODS:
        raise ValueError(f"unknown method {config.method!r}; choose from {', '.join(METHODS)}")
    chash = config_hash(instance, config)
    work, node_map = instance, None
    if config.preprocess:
        work, rep = preprocess(instance)
        node_map = rep.node_map
    t0 = time.monotonic()
    report = None
    nodes = 0
    if config.method == "brute-force":
        plan, value = brute_force(work)
        status, bound = "optimal", value
    elif config.method == "mip-direct":
        backend = get_backend(config.backend, external)
        model = build_direct_mip(work)
        res = backend.solve(model, limits=Limits(config.time_limit))
        nodes = res.nodes
        plan = None
        value = None
        if res.values is not None:
            plan = plan_from_values(work, model.column_names(), res.values)
            check = verify_solution(work, plan, res.objective, optimal=res.status == "optimal")
            if check.ok:
                value = check.objective
            else:
                raise RuntimeError("MIP solution failed verification: " + "; ".join(check.problems))
        status = res.status if res.status in ("optimal", "infeasible") else ("feasible" if plan else "limit")
        bound = value if status == "optimal" else res.bound
    else:
        if config.method == "lbbd-greedy":
            report = greedy(work, config.backend, mode=config.mode, window=config.window,
                            time_limit=config.time_limit)
        else:
            warm = None
            limit = config.time_limit
            if config.warm_start == "greedy":
                t1 = time.monotonic()
                g = greedy(work, config.backend, mode=config.mode, window=config.window, time_limit=limit)
                warm = g.plan
                if limit is not None:
                    limit = max(0.0, limit - (time.monotonic() - t1))
            elif config.warm_start not in (None, "", "none"):
                warm, _ = read_solution(config.warm_start)
                if node_map is not None:
                    warm = InterdictionPlan((node_map[n], t) for n, t in warm.placements if n in node_map)
            report = solve_lbbd(work, config.mode, config.backend, warm_start=warm, time_limit=limit,
                                window=config.window)
        plan, value, status, bound = report.plan, report.objective, report.status, report.bound
        if cut_pool:
            write_cut_pool(report.cuts, cut_pool)
    wall = time.monotonic() - t0
    stats = report.stats if report is not None else None
    record = RunRecord(
        instance=instance.id,
        method=config.method,
        status=status,
        objective=value,
        lower_bound=None if bound is None else float(bound),
        wall_time=round(wall, 6),
        opt_cuts=stats.optimality_count if stats else 0,
        feas_cuts=stats.feasibility_count if stats else 0,
        iterations=stats.iterations if stats else 0,
        nodes=nodes,
        seed=seed,
        config_hash=chash,
        config=config.key(),
    )
    return RunOutcome(record, _lift(plan, node_map), report)

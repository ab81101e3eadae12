"""Independent re-evaluation of a reported solution."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..firedyn import InterdictionPlan, evaluate, objective
from ..instance import Instance

LAMBDA_TOL = 1e-6


@dataclass
class VerificationReport:
    ok: bool
    objective: int | None
    reported: float | None
    problems: list = field(default_factory=list)
    violations: list = field(default_factory=list)


def verify_solution(instance: Instance, plan: InterdictionPlan, reported=None, values: dict | None = None,
                    optimal: bool = True) -> VerificationReport:
    """Recompute protection and feasibility for ``plan`` and compare.

    ``values`` optionally maps column names (``y_n``, ``lam_n``) from a
    direct-MIP solve; each ``y_n`` must match the recomputed protection
    status and each ``lam_n`` the recomputed arrival time within 1e-6.

    With ``optimal=False`` (an unfinished solve) the MIP may still mark
    protected nodes as unprotected, so ``reported`` and ``y_n`` only need
    to over-count: the reported value is an upper bound for the plan.
    """
    problems = plan.problems(instance)
    if problems:
        return VerificationReport(False, None, reported, problems)
    dyn = evaluate(instance, plan)
    obj = objective(dyn)
    violations = sorted(dyn.violations)
    if not obj.feasible:
        for n, t in violations:
            problems.append(f"resource at node {n} in period {t} arrives after the fire (t={dyn.arrivals[n]})")
    if reported is not None and obj.feasible:
        gap = float(reported) - obj.value
        if gap < -LAMBDA_TOL or (optimal and gap > LAMBDA_TOL):
            problems.append(f"reported objective {reported} but the plan leaves {obj.value} nodes unprotected")
    if values:
        for name, v in values.items():
            if name.startswith("y_"):
                n = int(name[2:])
                y, theta = round(v), int(n in dyn.unprotected)
                if n < instance.n and (y < theta or (optimal and y != theta)):
                    problems.append(f"{name}={v} disagrees with protection status of node {n}")
            elif name.startswith("lam_"):
                n = int(name[4:])
                if n < instance.n and abs(v - float(dyn.arrivals[n])) > LAMBDA_TOL:
                    problems.append(f"{name}={v} but the fire arrives at {dyn.arrivals[n]}")
    return VerificationReport(not problems, obj.value, reported, problems, violations)

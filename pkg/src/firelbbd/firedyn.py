"""Fire spread under an interdiction plan (the subproblem) and a brute-force oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable

from .instance import Instance
from .netgraph import INF, Network, ShortestPathTree, path_interior, shortest_path_tree


class PlanError(ValueError):
    """A plan breaks capacity, uniqueness or node/period validity."""


class SearchTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class InterdictionPlan:
    """Set of ``(node, period)`` placements."""

    placements: frozenset = frozenset()

    def __init__(self, placements: Iterable = ()):
        object.__setattr__(self, "placements", frozenset((int(n), t) for n, t in placements))

    def __iter__(self):
        return iter(sorted(self.placements))

    def __len__(self):
        return len(self.placements)

    @property
    def nodes(self) -> frozenset[int]:
        return frozenset(n for n, _ in self.placements)

    def at(self, t) -> list[int]:
        return sorted(n for n, s in self.placements if s == t)

    def period_of(self, n: int):
        for m, t in self.placements:
            if m == n:
                return t
        return None

    def dense(self, instance: Instance) -> dict:
        """``z[(n, t)]`` in {0, 1} for every candidate node and period."""
        return {
            (n, t): int((n, t) in self.placements)
            for n in instance.candidate_nodes()
            for t in instance.periods
        }

    def problems(self, instance: Instance) -> list[str]:
        """Human-readable list of structural violations (empty when valid)."""
        out = []
        seen: dict[int, object] = {}
        for n, t in sorted(self.placements):
            if not 0 <= n < instance.n:
                out.append(f"node {n} does not exist")
            elif n in instance.ignitions:
                out.append(f"node {n} is an ignition node")
            if t not in instance.capacity:
                out.append(f"period {t} is not a resource period")
            if n in seen:
                out.append(f"node {n} used in periods {seen[n]} and {t}")
            seen[n] = t
        for t, a in instance.capacity.items():
            used = len(self.at(t))
            if used > a:
                out.append(f"period {t} uses {used} resources but only {a} are available")
        return out

    def validate(self, instance: Instance) -> None:
        problems = self.problems(instance)
        if problems:
            raise PlanError("; ".join(problems))


@dataclass(frozen=True)
class FireDynamics:
    arrivals: tuple
    tree: ShortestPathTree
    network: Network  # reduced network (original weights)
    weights: tuple  # modified weight per arc of ``network``
    unprotected: frozenset[int]
    violations: frozenset  # (node, period) placed strictly after fire arrival

    @property
    def feasible(self) -> bool:
        return not self.violations

    def interior(self, n: int) -> list[int]:
        """Interior of the binding fire path to real node ``n``."""
        return path_interior(self.tree, self.network, n)


@dataclass(frozen=True)
class Objective:
    feasible: bool
    value: int | None  # number of unprotected nodes; None when infeasible


def modified_weights(instance: Instance, plan: InterdictionPlan) -> Network:
    """Instance network with ``delta`` added to every arc leaving an interdicted node."""
    for n in plan.nodes:
        if not 0 <= n < instance.n:
            raise PlanError(f"placement on unknown node {n}")
    hot = plan.nodes
    d = instance.delta
    arcs = tuple((i, j, w + d if i in hot else w) for i, j, w in instance.network.arcs)
    return Network(instance.n, arcs)


def _weights(network: Network, nodes: frozenset, delta) -> list:
    return [w + delta if i in nodes else w for i, _, w in network.arcs]


def evaluate(instance: Instance, plan: InterdictionPlan) -> FireDynamics:
    """Arrival times, protection status and infeasible placements for ``plan``."""
    plan.validate(instance)
    base, root = instance.reduced()
    weights = _weights(base, plan.nodes, instance.delta)
    tree = shortest_path_tree(base, root, weights)
    arrivals = tree.dist[: instance.n]
    unprotected = frozenset(n for n, d in enumerate(arrivals) if d < instance.psi)
    violations = frozenset((n, t) for n, t in plan.placements if arrivals[n] < t)
    return FireDynamics(arrivals, tree, base, tuple(weights), unprotected, violations)


def objective(dynamics: FireDynamics) -> Objective:
    if dynamics.violations:
        return Objective(False, None)
    return Objective(True, len(dynamics.unprotected))


def plan_value(instance: Instance, plan: InterdictionPlan) -> int | None:
    return objective(evaluate(instance, plan)).value


def count_plans(instance: Instance) -> int:
    """Number of structurally valid plans (capacity and uniqueness only)."""
    m = len(instance.candidate_nodes())
    periods = instance.periods

    def rec(k: int, free: int) -> int:
        if k == len(periods):
            return 1
        cap = instance.capacity[periods[k]]
        return sum(comb(free, j) * rec(k + 1, free - j) for j in range(min(cap, free) + 1))

    return rec(0, m)


def enumerate_plans(instance: Instance):
    """Yield every structurally valid plan, smallest first within each period."""
    nodes = instance.candidate_nodes()
    periods = instance.periods

    def rec(k: int, used: frozenset, acc: list):
        if k == len(periods):
            yield InterdictionPlan(acc)
            return
        t = periods[k]
        free = [n for n in nodes if n not in used]
        for size in range(min(instance.capacity[t], len(free)) + 1):
            for combo in itertools.combinations(free, size):
                yield from rec(k + 1, used | set(combo), acc + [(n, t) for n in combo])

    yield from rec(0, frozenset(), [])


def brute_force(instance: Instance, limit: int = 200_000) -> tuple[InterdictionPlan, int]:
    """Exact optimum by evaluating every valid plan.

    Raises :class:`SearchTooLarge` when there are more than ``limit`` plans.
    """
    total = count_plans(instance)
    if total > limit:
        raise SearchTooLarge(f"{total} plans exceed the enumeration limit {limit}")
    best_plan, best = None, None
    for plan in enumerate_plans(instance):
        obj = objective(evaluate(instance, plan))
        if obj.feasible and (best is None or obj.value < best):
            best_plan, best = plan, obj.value
    # the empty plan is always feasible, so best is set
    return best_plan, best


__all__ = [
    "INF", "InterdictionPlan", "FireDynamics", "Objective", "PlanError", "SearchTooLarge",
    "modified_weights", "evaluate", "objective", "plan_value", "count_plans",
    "enumerate_plans", "brute_force",
]

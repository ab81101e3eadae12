"""Solver-neutral MILP container and result types."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

BINARY = "binary"
CONTINUOUS = "continuous"
SENSES = ("<=", ">=", "=")


class ModelError(ValueError):
    pass


class NeedsExternalBackend(RuntimeError):
    """The model's shape is outside what the chosen in-repo backend can solve exactly."""


class BackendFailure(RuntimeError):
    def __init__(self, message: str, result: "BackendResult | None" = None):
        super().__init__(message)
        self.result = result


@dataclass
class Column:
    name: str
    kind: str = BINARY
    lower: float = 0
    upper: float = 1
    obj: float = 0


@dataclass
class Row:
    name: str
    sense: str
    rhs: float
    terms: dict  # column index -> coefficient
    group: str | None = None  # rows sharing a group are disjoint unit-coefficient packing rows

    def activity(self, x: Sequence) -> float:
        return sum(c * x[j] for j, c in self.terms.items())

    def satisfied(self, x: Sequence, tol: float = 0) -> bool:
        a = self.activity(x)
        if self.sense == "<=":
            return a <= self.rhs + tol
        if self.sense == ">=":
            return a >= self.rhs - tol
        return abs(a - self.rhs) <= tol


@dataclass
class MilpModel:
    columns: list[Column] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    _index: dict = field(default_factory=dict, repr=False)

    def add_column(self, name: str, kind: str = BINARY, lower=0, upper=1, obj=0) -> int:
        if name in self._index:
            raise ModelError(f"duplicate column name {name!r}")
        if kind not in (BINARY, CONTINUOUS):
            raise ModelError(f"unknown column kind {kind!r}")
        if kind == CONTINUOUS and not (math.isfinite(lower) and math.isfinite(upper)):
            raise ModelError(f"continuous column {name!r} needs finite bounds")
        self._index[name] = len(self.columns)
        self.columns.append(Column(name, kind, lower, upper, obj))
        return len(self.columns) - 1

    def add_row(self, name: str, sense: str, rhs, terms: dict, group: str | None = None) -> int:
        if sense not in SENSES:
            raise ModelError(f"bad sense {sense!r}")
        self.rows.append(Row(name, sense, rhs, {j: c for j, c in terms.items() if c != 0}, group))
        return len(self.rows) - 1

    def index(self, name: str) -> int:
        return self._index[name]

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def binaries(self) -> list[int]:
        return [j for j, c in enumerate(self.columns) if c.kind == BINARY]

    def objective_value(self, x: Sequence) -> float:
        return sum(c.obj * x[j] for j, c in enumerate(self.columns) if c.obj)

    def feasible(self, x: Sequence, tol: float = 1e-6) -> bool:
        for j, c in enumerate(self.columns):
            if x[j] < c.lower - tol or x[j] > c.upper + tol:
                return False
            if c.kind == BINARY and abs(x[j] - round(x[j])) > tol:
                return False
        return all(r.satisfied(x, tol) for r in self.rows)

    def copy(self) -> "MilpModel":
        m = MilpModel(metadata=dict(self.metadata))
        for c in self.columns:
            m.add_column(c.name, c.kind, c.lower, c.upper, c.obj)
        for r in self.rows:
            m.rows.append(Row(r.name, r.sense, r.rhs, dict(r.terms), r.group))
        return m


@dataclass
class BackendResult:
    status: str  # optimal | feasible | infeasible | limit
    values: Optional[list] = None
    objective: Optional[float] = None
    bound: Optional[float] = None
    nodes: int = 0
    iterations: int = 0
    wall_time: float = 0.0
    message: str = ""

    def value_map(self, model: MilpModel) -> dict:
        if self.values is None:
            return {}
        return dict(zip(model.column_names(), self.values))


# A lazy-constraint hook: receives the candidate incumbent and returns rows to add.
# Returning an empty list accepts the candidate.
IncumbentCallback = Callable[[list], list]


@dataclass
class Limits:
    time_limit: float | None = None
    node_limit: int | None = None
    deadline: float | None = field(default=None, repr=False)

    def start(self) -> "Limits":
        if self.deadline is None and self.time_limit is not None:
            return Limits(self.time_limit, self.node_limit, time.monotonic() + self.time_limit)
        return self

    def remaining(self) -> float | None:
        if self.deadline is None:
            return None
        return max(0.0, self.deadline - time.monotonic())

    def expired(self) -> bool:
        return self.deadline is not None and time.monotonic() >= self.deadline

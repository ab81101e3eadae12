"""Problem instances: grid generation, pre-processing and the instance file.

The instance file is a JSON document with a fixed key order::

    {
     "schema_version": 1,
     "id": "small-0-s1",
     "nodes": 100,
     "arcs": [
      [0, 1, 5],
      ...
     ],
     "ignitions": [55],
     "psi": 28,
     "delta": 50,
     "periods": [10, 15],
     "capacity": [[10, 3], [15, 3]],
     "labels": [[0, 0], [0, 1], ...],        # optional, (row, col) per node
     "generator": {...}                     # optional GridSpec provenance
    }

Arcs are sorted by (tail, head). Rational weights are written as
``"p/q"`` strings, integers as plain numbers. Grid arcs pointing towards
direction D (north = decreasing row) draw their travel time from the
distribution for D.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Mapping

from .netgraph import INF, GraphError, Network, shortest_path_tree, super_source_reduce

SCHEMA_VERSION = 1

# (north, south, east, west) inclusive bounds per small-instance row.
TRAVEL_TIME_ROWS = (
    ((7, 9), (2, 4), (4, 6), (6, 8)),
    ((7, 9), (1, 3), (4, 6), (6, 8)),
    ((7, 9), (2, 4), (3, 5), (6, 8)),
    ((7, 9), (1, 3), (3, 5), (6, 8)),
    ((7, 9), (2, 4), (4, 6), (4, 6)),
    ((7, 9), (1, 3), (4, 6), (4, 6)),
    ((7, 9), (2, 4), (3, 5), (3, 5)),
    ((7, 9), (1, 3), (3, 5), (3, 5)),
)
SMALL_SIZES = ((10, (5, 5)), (20, (10, 10)), (30, (15, 15)))
LARGE_TYPES = {
    "A": dict(periods=(10, 20, 30, 40), capacity=3, psi=70, delta=50),
    "B": dict(periods=(10, 20, 30, 40, 50, 60), capacity=3, psi=70, delta=30),
}

_MASK64 = (1 << 64) - 1


class InstanceError(ValueError):
    """Schema or consistency violation; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class SplitMix64:
    """The splitmix64 generator (Steele, Lea & Flood constants)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform_int(self, lo: int, hi: int) -> int:
        """Integer in ``[lo, hi]``; plain modulo reduction (part of the file contract)."""
        return lo + self.next() % (hi - lo + 1)


def derive_seed(seed: int, tag: str) -> int:
    """Mix a user seed with a preset tag so presets sharing a seed get unrelated streams."""
    return SplitMix64((seed & _MASK64) ^ zlib.crc32(tag.encode())).next()


@dataclass(frozen=True)
class Instance:
    network: Network
    ignitions: frozenset[int]
    psi: int | Fraction
    delta: int | Fraction
    periods: tuple
    capacity: Mapping
    labels: tuple | None = None
    id: str = "instance"
    generator: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ignitions", frozenset(self.ignitions))
        object.__setattr__(self, "periods", tuple(sorted(self.periods)))
        object.__setattr__(self, "capacity", dict(sorted(self.capacity.items())))
        _validate(self)

    @property
    def n(self) -> int:
        return self.network.node_count

    def reduced(self) -> tuple[Network, int]:
        """Single-root network (super-source appended when needed) and its root."""
        cached = self.__dict__.get("_reduced")
        if cached is None:
            cached = super_source_reduce(self.network, self.ignitions)
            object.__setattr__(self, "_reduced", cached)
        return cached

    def candidate_nodes(self) -> list[int]:
        """Nodes that may host a resource (everything except ignitions)."""
        return [n for n in range(self.n) if n not in self.ignitions]

    def total_capacity(self) -> int:
        return sum(self.capacity.values())

    def with_capacity(self, capacity: Mapping) -> "Instance":
        return replace(self, capacity={t: capacity.get(t, 0) for t in self.periods}, generator=self.generator)


def _validate(inst: Instance) -> None:
    if not isinstance(inst.network, Network):
        raise InstanceError("network", "not a Network")
    if inst.network.zero_tails:
        raise InstanceError("arcs", "zero weights are reserved for the internal super-source")
    if not inst.ignitions:
        raise InstanceError("ignitions", "must be non-empty")
    for k, n in enumerate(sorted(inst.ignitions)):
        if not 0 <= n < inst.n:
            raise InstanceError(f"ignitions[{k}]", f"node {n} out of range")
    for name in ("psi", "delta"):
        v = getattr(inst, name)
        if isinstance(v, bool) or not isinstance(v, Rational) or v <= 0:
            raise InstanceError(name, f"must be a positive integer or rational, got {v!r}")
    seen = set()
    for k, t in enumerate(inst.periods):
        if isinstance(t, bool) or not isinstance(t, Rational):
            raise InstanceError(f"periods[{k}]", f"{t!r} is not exact")
        if t in seen:
            raise InstanceError(f"periods[{k}]", f"duplicate period {t}")
        seen.add(t)
        if not 0 <= t < inst.psi:
            raise InstanceError(f"periods[{k}]", f"period {t} outside [0, psi={inst.psi})")
    if set(inst.capacity) != seen:
        raise InstanceError("capacity", "keys must match periods exactly")
    for t, a in inst.capacity.items():
        if isinstance(a, bool) or not isinstance(a, int) or a < 0:
            raise InstanceError(f"capacity[{t}]", f"must be a non-negative integer, got {a!r}")
    if inst.labels is not None and len(inst.labels) != inst.n:
        raise InstanceError("labels", "one (row, col) label per node required")


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    ignition: tuple[int, int]
    dist_north: tuple[int, int]
    dist_south: tuple[int, int]
    dist_east: tuple[int, int]
    dist_west: tuple[int, int]
    seed: int
    psi: int = 28
    delta: int = 50
    periods: tuple = (10, 15)
    capacity: tuple = (3, 3)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InstanceError("rows/cols", "grid dimensions must be positive")
        r, c = self.ignition
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise InstanceError("ignition", f"{self.ignition} outside the {self.rows}x{self.cols} grid")
        for name in ("dist_north", "dist_south", "dist_east", "dist_west"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise InstanceError(name, f"need 1 <= lo <= hi, got ({lo}, {hi})")
        if not 0 <= self.seed <= _MASK64:
            raise InstanceError("seed", "must be an unsigned 64-bit integer")
        if len(self.periods) != len(self.capacity):
            raise InstanceError("capacity", "one capacity per period")

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "ignition": list(self.ignition),
            "dist_north": list(self.dist_north),
            "dist_south": list(self.dist_south),
            "dist_east": list(self.dist_east),
            "dist_west": list(self.dist_west),
            "seed": self.seed,
            "psi": self.psi,
            "delta": self.delta,
            "periods": list(self.periods),
            "capacity": list(self.capacity),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        d = dict(d)
        for key in ("ignition", "dist_north", "dist_south", "dist_east", "dist_west", "periods", "capacity"):
            d[key] = tuple(d[key])
        return cls(**d)


def generate_grid(spec: GridSpec, id: str | None = None) -> Instance:
    """Four-neighbour grid with direction-dependent random travel times.

    Node ``(r, c)`` has id ``r * cols + c``. Draws are taken in row-major
    node order and, per node, in the order north, south, east, west,
    skipping directions that leave the grid.
    """
    rng = SplitMix64(spec.seed)
    moves = (
        (-1, 0, spec.dist_north),
        (1, 0, spec.dist_south),
        (0, 1, spec.dist_east),
        (0, -1, spec.dist_west),
    )
    arcs = []
    for r in range(spec.rows):
        for c in range(spec.cols):
            for dr, dc, (lo, hi) in moves:
                rr, cc = r + dr, c + dc
                if 0 <= rr < spec.rows and 0 <= cc < spec.cols:
                    arcs.append((r * spec.cols + c, rr * spec.cols + cc, rng.uniform_int(lo, hi)))
    network = Network(spec.rows * spec.cols, tuple(arcs))
    labels = tuple((r, c) for r in range(spec.rows) for c in range(spec.cols))
    ign = spec.ignition[0] * spec.cols + spec.ignition[1]
    return Instance(
        network=network,
        ignitions=frozenset([ign]),
        psi=spec.psi,
        delta=spec.delta,
        periods=tuple(spec.periods),
        capacity=dict(zip(spec.periods, spec.capacity)),
        labels=labels,
        id=id or f"grid-{spec.rows}x{spec.cols}-{spec.seed}",
        generator=spec.to_dict(),
    )


def small_spec(index: int, seed: int) -> GridSpec:
    """GridSpec for small preset ``index`` (0..23)."""
    if not 0 <= index < 24:
        raise InstanceError("preset", f"small presets are 0..23, got {index}")
    size, ignition = SMALL_SIZES[index // 8]
    north, south, east, west = TRAVEL_TIME_ROWS[index % 8]
    return GridSpec(
        rows=size, cols=size, ignition=ignition,
        dist_north=north, dist_south=south, dist_east=east, dist_west=west,
        seed=derive_seed(seed, f"small:{index}"),
        psi=28, delta=50, periods=(10, 15), capacity=(3, 3),
    )


def large_spec(index: int, kind: str, seed: int) -> GridSpec:
    if kind not in LARGE_TYPES:
        raise InstanceError("type", f"large instance type must be A or B, got {kind!r}")
    if not 0 <= index < 8:
        raise InstanceError("preset", f"large presets are L0..L7, got L{index}")
    p = LARGE_TYPES[kind]
    north, south, east, west = TRAVEL_TIME_ROWS[index]
    return GridSpec(
        rows=20, cols=20, ignition=(10, 10),
        dist_north=north, dist_south=south, dist_east=east, dist_west=west,
        seed=derive_seed(seed, f"large:L{index}{kind}"),
        psi=p["psi"], delta=p["delta"], periods=p["periods"],
        capacity=(p["capacity"],) * len(p["periods"]),
    )


def generate_large(spec: GridSpec, kind: str) -> Instance:
    """Apply the type A/B resource schedule to ``spec`` and generate it."""
    if kind not in LARGE_TYPES:
        raise InstanceError("type", f"large instance type must be A or B, got {kind!r}")
    p = LARGE_TYPES[kind]
    spec = replace(
        spec, psi=p["psi"], delta=p["delta"], periods=p["periods"],
        capacity=(p["capacity"],) * len(p["periods"]),
    )
    return generate_grid(spec)


def preset(name: str, seed: int = 0) -> Instance:
    """Build a named preset: ``small:0`` .. ``small:23`` or ``large:L0A`` .. ``large:L7B``."""
    family, _, key = name.partition(":")
    if family == "small":
        try:
            index = int(key)
        except ValueError:
            raise InstanceError("preset", f"bad small preset {name!r}") from None
        return generate_grid(small_spec(index, seed), id=f"small-{index}-s{seed}")
    if family == "large":
        if len(key) != 3 or key[0] != "L" or not key[1].isdigit():
            raise InstanceError("preset", f"bad large preset {name!r}")
        spec = large_spec(int(key[1]), key[2], seed)
        return generate_grid(spec, id=f"large-{key}-s{seed}")
    raise InstanceError("preset", f"unknown preset family in {name!r}")


SMALL_PRESETS = tuple(f"small:{i}" for i in range(24))
LARGE_PRESETS = tuple(f"large:L{i}{k}" for k in "AB" for i in range(8))


@dataclass(frozen=True)
class PreprocessReport:
    kept: frozenset[int]
    removed: frozenset[int]
    base_arrivals: tuple
    node_map: dict = field(compare=False, default_factory=dict)  # old id -> new id


def base_arrivals(inst: Instance) -> list:
    """Arrival times with no interdiction (real nodes only)."""
    network, root = inst.reduced()
    tree = shortest_path_tree(network, root)
    return list(tree.dist[: inst.n])


def preprocess(inst: Instance) -> tuple[Instance, PreprocessReport]:
    """Drop nodes the fire cannot reach before ``psi`` even without interdiction.

    Interdiction only lengthens arcs, so such nodes stay protected under
    every plan, and any path through them reaches later nodes no earlier
    than ``psi``. Ignition nodes are always kept.
    """
    arrivals = base_arrivals(inst)
    kept = frozenset(n for n in range(inst.n) if arrivals[n] < inst.psi or n in inst.ignitions)
    removed = frozenset(range(inst.n)) - kept
    network, remap = inst.network.subgraph(kept)
    labels = None
    if inst.labels is not None:
        labels = tuple(inst.labels[old] for old in sorted(kept))
    out = Instance(
        network=network,
        ignitions=frozenset(remap[n] for n in inst.ignitions),
        psi=inst.psi,
        delta=inst.delta,
        periods=inst.periods,
        capacity=inst.capacity,
        labels=labels,
        id=inst.id,
        generator=inst.generator,
    )
    return out, PreprocessReport(kept, removed, tuple(arrivals), remap)


# -- serialization -----------------------------------------------------------

def _num_out(v):
    if isinstance(v, Fraction) and v.denominator != 1:
        return f"{v.numerator}/{v.denominator}"
    return int(v)


def _num_in(v, path: str):
    if isinstance(v, bool):
        raise InstanceError(path, f"expected a number, got {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        try:
            f = Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise InstanceError(path, f"bad rational {v!r}") from None
        return int(f) if f.denominator == 1 else f
    if isinstance(v, float) and v.is_integer():
        return int(v)
    raise InstanceError(path, f"expected an integer or 'p/q' rational, got {v!r}")


def to_dict(inst: Instance) -> dict:
    d = {
        "schema_version": SCHEMA_VERSION,
        "id": inst.id,
        "nodes": inst.n,
        "arcs": [[i, j, _num_out(w)] for i, j, w in inst.network.arcs],
        "ignitions": sorted(inst.ignitions),
        "psi": _num_out(inst.psi),
        "delta": _num_out(inst.delta),
        "periods": [_num_out(t) for t in inst.periods],
        "capacity": [[_num_out(t), a] for t, a in inst.capacity.items()],
    }
    if inst.labels is not None:
        d["labels"] = [list(x) for x in inst.labels]
    if inst.generator is not None:
        d["generator"] = inst.generator
    return d


def dumps(inst: Instance) -> str:
    """Canonical text form: one key per line, one list item per line."""
    d = to_dict(inst)
    lines = ["{"]
    keys = list(d)
    for k, key in enumerate(keys):
        value = d[key]
        comma = "," if k < len(keys) - 1 else ""
        if isinstance(value, list) and value and isinstance(value[0], list):
            lines.append(f" {json.dumps(key)}: [")
            for m, item in enumerate(value):
                sep = "," if m < len(value) - 1 else ""
                lines.append(f"  {json.dumps(item, separators=(', ', ': '))}{sep}")
            lines.append(f" ]{comma}")
        else:
            lines.append(f" {json.dumps(key)}: {json.dumps(value, separators=(', ', ': '))}{comma}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def from_dict(d: dict) -> Instance:
    if not isinstance(d, dict):
        raise InstanceError("$", "top level must be an object")
    required = ("schema_version", "id", "nodes", "arcs", "ignitions", "psi", "delta", "periods", "capacity")
    for key in required:
        if key not in d:
            raise InstanceError(key, "missing")
    if d["schema_version"] != SCHEMA_VERSION:
        raise InstanceError("schema_version", f"unsupported version {d['schema_version']!r}")
    unknown = set(d) - set(required) - {"labels", "generator"}
    if unknown:
        raise InstanceError(sorted(unknown)[0], "unknown field")
    nodes = d["nodes"]
    if isinstance(nodes, bool) or not isinstance(nodes, int) or nodes <= 0:
        raise InstanceError("nodes", "must be a positive integer")
    if not isinstance(d["arcs"], list):
        raise InstanceError("arcs", "must be a list")
    arcs = []
    for k, a in enumerate(d["arcs"]):
        if not isinstance(a, list) or len(a) != 3:
            raise InstanceError(f"arcs[{k}]", "expected [tail, head, weight]")
        for m in (0, 1):
            if isinstance(a[m], bool) or not isinstance(a[m], int) or not 0 <= a[m] < nodes:
                raise InstanceError(f"arcs[{k}][{m}]", f"node id {a[m]!r} out of range")
        w = _num_in(a[2], f"arcs[{k}][2]")
        if w <= 0:
            raise InstanceError(f"arcs[{k}][2]", f"weight must be strictly positive, got {a[2]!r}")
        arcs.append((a[0], a[1], w))
    try:
        network = Network(nodes, tuple(arcs))
    except GraphError as exc:
        raise InstanceError("arcs", str(exc)) from None
    for k, n in enumerate(d["ignitions"]):
        if isinstance(n, bool) or not isinstance(n, int):
            raise InstanceError(f"ignitions[{k}]", "node ids must be integers")
    periods = [_num_in(t, f"periods[{k}]") for k, t in enumerate(d["periods"])]
    capacity = {}
    for k, pair in enumerate(d["capacity"]):
        if not isinstance(pair, list) or len(pair) != 2:
            raise InstanceError(f"capacity[{k}]", "expected [period, count]")
        capacity[_num_in(pair[0], f"capacity[{k}][0]")] = pair[1]
    labels = None
    if "labels" in d:
        labels = tuple(tuple(x) for x in d["labels"])
    return Instance(
        network=network,
        ignitions=frozenset(d["ignitions"]),
        psi=_num_in(d["psi"], "psi"),
        delta=_num_in(d["delta"], "delta"),
        periods=tuple(periods),
        capacity=capacity,
        labels=labels,
        id=d["id"],
        generator=d.get("generator"),
    )


def loads(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("$", f"not valid JSON ({exc})") from None
    return from_dict(data)


def save(inst: Instance, path) -> None:
    Path(path).write_text(dumps(inst))


def load(path) -> Instance:
    return loads(Path(path).read_text())


__all__ = [
    "INF", "Instance", "InstanceError", "GridSpec", "PreprocessReport", "SplitMix64",
    "generate_grid", "generate_large", "preset", "small_spec", "large_spec", "preprocess",
    "base_arrivals", "dumps", "loads", "save", "load", "SMALL_PRESETS", "LARGE_PRESETS",
]

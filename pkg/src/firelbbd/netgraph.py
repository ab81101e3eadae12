"""Directed landscape graphs and deterministic shortest-path trees.

Weights are kept as exact Python numbers (``int`` or ``fractions.Fraction``)
so that arrival-time comparisons against thresholds never depend on
floating-point rounding.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

Arc = tuple[int, int, "int | Fraction"]

INF = math.inf


class GraphError(ValueError):
    """Raised for malformed networks or invalid node references."""


class UnreachableNode(LookupError):
    """Raised when a path is requested to a node the tree does not reach."""


def _check_weight(w) -> None:
    if isinstance(w, bool) or not isinstance(w, Rational):
        raise GraphError(f"weight {w!r} is not an exact integer or rational")


@dataclass(frozen=True)
class Network:
    """Weighted digraph on dense node ids ``0..node_count-1``.

    ``zero_tails`` lists nodes whose outgoing arcs may carry zero weight;
    only the artificial super-source produced by :func:`super_source_reduce`
    uses it.
    """

    node_count: int
    arcs: tuple[Arc, ...]
    zero_tails: frozenset[int] = frozenset()
    out_arcs: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    in_arcs: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.node_count <= 0:
            raise GraphError("node_count must be positive")
        arcs = tuple(sorted((int(i), int(j), w) for i, j, w in self.arcs))
        seen = set()
        out = [[] for _ in range(self.node_count)]
        inn = [[] for _ in range(self.node_count)]
        for k, (i, j, w) in enumerate(arcs):
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise GraphError(f"arc ({i}, {j}) references a node outside 0..{self.node_count - 1}")
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if (i, j) in seen:
                raise GraphError(f"duplicate arc ({i}, {j})")
            seen.add((i, j))
            _check_weight(w)
            if w < 0 or (w == 0 and i not in self.zero_tails):
                raise GraphError(f"arc ({i}, {j}) has non-positive weight {w}")
            out[i].append(k)
            inn[j].append(k)
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "out_arcs", tuple(map(tuple, out)))
        object.__setattr__(self, "in_arcs", tuple(map(tuple, inn)))

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    def weight(self, tail: int, head: int):
        for k in self.out_arcs[tail]:
            if self.arcs[k][1] == head:
                return self.arcs[k][2]
        raise KeyError((tail, head))

    def successors(self, node: int) -> list[int]:
        return [self.arcs[k][1] for k in self.out_arcs[node]]

    def max_weight(self):
        return max((w for _, _, w in self.arcs), default=0)

    def reweighted(self, weights: Sequence) -> "Network":
        """Copy with arc ``k`` (in sorted order) given ``weights[k]``."""
        if len(weights) != len(self.arcs):
            raise GraphError("weight vector length does not match arc count")
        new = [(i, j, w) for (i, j, _), w in zip(self.arcs, weights)]
        return Network(self.node_count, tuple(new), self.zero_tails)

    def subgraph(self, keep: Iterable[int]) -> tuple["Network", dict[int, int]]:
        """Induced subgraph on ``keep`` with nodes renumbered in id order.

        Returns the new network and the old-id -> new-id map.
        """
        kept = sorted(set(keep))
        remap = {old: new for new, old in enumerate(kept)}
        arcs = tuple(
            (remap[i], remap[j], w) for i, j, w in self.arcs if i in remap and j in remap
        )
        zero = frozenset(remap[n] for n in self.zero_tails if n in remap)
        return Network(len(kept), arcs, zero), remap


@dataclass(frozen=True)
class ShortestPathTree:
    root: int
    dist: tuple
    pred: tuple  # arc index into the network, or None

    def reachable(self, n: int) -> bool:
        return self.dist[n] != INF


def super_source_reduce(network: Network, ignitions: Iterable[int]) -> tuple[Network, int]:
    """Collapse several ignition nodes into one root.

    A single ignition is returned as-is. Otherwise a new node (id
    ``node_count``) is appended with a zero-weight arc to every ignition.
    """
    ign = sorted(set(ignitions))
    if not ign:
        raise GraphError("ignition set is empty")
    for n in ign:
        if not 0 <= n < network.node_count:
            raise GraphError(f"ignition node {n} is not in the network")
    if len(ign) == 1:
        return network, ign[0]
    root = network.node_count
    arcs = network.arcs + tuple((root, n, 0) for n in ign)
    return Network(network.node_count + 1, arcs, network.zero_tails | {root}), root


def shortest_path_tree(network: Network, root: int, weights: Sequence | None = None) -> ShortestPathTree:
    """Dijkstra from ``root`` with a binary heap and lazy deletion.

    ``weights`` optionally overrides the arc weights (indexed like
    ``network.arcs``) without building a new network. Ties are broken
    towards the smaller node id, both when popping and when choosing a
    predecessor, so the returned tree is reproducible.
    """
    n_nodes = network.node_count
    if not 0 <= root < n_nodes:
        raise GraphError(f"root {root} is not in the network")
    arcs = network.arcs
    if weights is None:
        weights = [w for _, _, w in arcs]
    dist: list = [INF] * n_nodes
    pred: list = [None] * n_nodes
    done = [False] * n_nodes
    dist[root] = 0
    heap = [(0, root)]
    out_arcs = network.out_arcs
    while heap:
        d, u = heapq.heappop(heap)
        if done[u] or d > dist[u]:
            continue
        done[u] = True
        for k in out_arcs[u]:
            v = arcs[k][1]
            if done[v]:
                continue
            nd = d + weights[k]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = k
                heapq.heappush(heap, (nd, v))
            elif nd == dist[v] and pred[v] is not None and u < arcs[pred[v]][0]:
                pred[v] = k
    return ShortestPathTree(root, tuple(dist), tuple(pred))


def extract_path(tree: ShortestPathTree, network: Network, n: int) -> list[int]:
    """Node sequence from the root to ``n`` (both inclusive)."""
    if tree.dist[n] == INF:
        raise UnreachableNode(f"node {n} is not reachable from {tree.root}")
    path = [n]
    while path[-1] != tree.root:
        path.append(network.arcs[tree.pred[path[-1]]][0])
    path.reverse()
    return path


def path_interior(tree: ShortestPathTree, network: Network, n: int) -> list[int]:
    """Nodes strictly between the root and ``n`` on the tree path."""
    path = extract_path(tree, network, n)
    return path[1:-1]


def bellman_ford(network: Network, root: int) -> list:
    """Plain Bellman-Ford distances; slow, kept as an independent check."""
    dist: list = [INF] * network.node_count
    dist[root] = 0
    for _ in range(network.node_count):
        changed = False
        for i, j, w in network.arcs:
            if dist[i] + w < dist[j]:
                dist[j] = dist[i] + w
                changed = True
        if not changed:
            break
    return dist

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings

from firelbbd.netgraph import (
    GraphError,
    Network,
    UnreachableNode,
    bellman_ford,
    extract_path,
    path_interior,
    shortest_path_tree,
    super_source_reduce,
)

from conftest import networks


def grid3(w=2) -> Network:
    arcs = []
    for r in range(3):
        for c in range(3):
            for dr, dc in ((-1, 0), (1, 0), (0, 1), (0, -1)):
                if 0 <= r + dr < 3 and 0 <= c + dc < 3:
                    arcs.append((3 * r + c, 3 * (r + dr) + c + dc, w))
    return Network(9, tuple(arcs))


def test_single_arc():
    t = shortest_path_tree(Network(2, ((0, 1, 3),)), 0)
    assert t.dist == (0, 3)
    assert t.pred[0] is None and t.pred[1] == 0


def test_unreachable_nodes_are_infinite():
    t = shortest_path_tree(Network(3, ((1, 2, 1),)), 0)
    assert t.dist == (0, math.inf, math.inf)
    assert t.pred == (None, None, None)


def test_grid_corner_distance_and_interior():
    net = grid3()
    t = shortest_path_tree(net, 4)
    for corner in (0, 2, 6, 8):
        assert t.dist[corner] == 4
        assert len(path_interior(t, net, corner)) == 1
        # brute force over simple paths of length 2 through an edge neighbour
        best = min(net.weight(4, m) + net.weight(m, corner)
                   for m in range(9) if (4, m) in {(i, j) for i, j, _ in net.arcs}
                   and (m, corner) in {(i, j) for i, j, _ in net.arcs})
        assert best == 4


def test_extract_path_chain_and_root():
    net = Network(3, ((0, 1, 1), (1, 2, 1)))
    t = shortest_path_tree(net, 0)
    assert extract_path(t, net, 0) == [0]
    assert extract_path(t, net, 2) == [0, 1, 2]
    assert path_interior(t, net, 2) == [1]


def test_extract_path_unreachable_raises():
    net = Network(3, ((0, 1, 1),))
    t = shortest_path_tree(net, 0)
    with pytest.raises(UnreachableNode):
        extract_path(t, net, 2)


def test_tie_break_prefers_smaller_predecessor():
    # 0->1->3 and 0->2->3 both cost 2
    net = Network(4, ((0, 2, 1), (0, 1, 1), (2, 3, 1), (1, 3, 1)))
    t = shortest_path_tree(net, 0)
    assert extract_path(t, net, 3) == [0, 1, 3]


def test_super_source_single_identity():
    net = Network(3, ((0, 1, 1),))
    out, root = super_source_reduce(net, {1})
    assert out is net and root == 1


def test_super_source_two_ignitions():
    net = Network(4, ((0, 1, 1), (2, 3, 1)))
    out, root = super_source_reduce(net, {0, 2})
    assert root == 4 and out.node_count == 5
    assert (4, 0, 0) in out.arcs and (4, 2, 0) in out.arcs
    t = shortest_path_tree(out, root)
    assert t.dist[0] == 0 and t.dist[2] == 0


def test_super_source_errors():
    net = Network(2, ((0, 1, 1),))
    with pytest.raises(GraphError):
        super_source_reduce(net, set())
    with pytest.raises(GraphError):
        super_source_reduce(net, {5})


@pytest.mark.parametrize("arcs", [((0, 0, 1),), ((0, 1, 1), (0, 1, 2)), ((0, 1, 0),), ((0, 1, -1),), ((0, 1, 1.5),), ((0, 3, 1),)])
def test_network_rejects_bad_arcs(arcs):
    with pytest.raises(GraphError):
        Network(2, arcs)


def test_rational_weights_are_exact():
    net = Network(3, ((0, 1, Fraction(1, 3)), (1, 2, Fraction(2, 3))))
    assert shortest_path_tree(net, 0).dist[2] == 1


@settings(max_examples=150, deadline=None)
@given(networks())
def test_dijkstra_matches_bellman_ford(net):
    t = shortest_path_tree(net, 0)
    assert list(t.dist) == bellman_ford(net, 0)


@settings(max_examples=150, deadline=None)
@given(networks())
def test_bellman_inequality_and_tree_consistency(net):
    t = shortest_path_tree(net, 0)
    for i, j, w in net.arcs:
        assert t.dist[j] <= t.dist[i] + w
    for v in range(net.node_count):
        k = t.pred[v]
        if k is not None:
            i, j, w = net.arcs[k]
            assert j == v and t.dist[v] == t.dist[i] + w


@settings(max_examples=50, deadline=None)
@given(networks())
def test_deterministic_pred(net):
    assert shortest_path_tree(net, 0).pred == shortest_path_tree(net, 0).pred


def test_small_graphs_exhaustive_paths():
    """Distances equal the cheapest simple path on a dense 5-node graph."""
    arcs = tuple((i, j, 1 + (3 * i + 5 * j) % 7) for i, j in itertools.permutations(range(5), 2))
    net = Network(5, arcs)
    w = {(i, j): c for i, j, c in arcs}
    t = shortest_path_tree(net, 0)
    for target in range(1, 5):
        best = math.inf
        others = [v for v in range(1, 5) if v != target]
        for k in range(len(others) + 1):
            for mid in itertools.permutations(others, k):
                path = (0, *mid, target)
                best = min(best, sum(w[a, b] for a, b in zip(path, path[1:])))
        assert t.dist[target] == best

"""The strengthened direct MIP (shortest-path tree, its dual, and complementary slackness)."""

from __future__ import annotations

from ..firedyn import InterdictionPlan
from ..instance import Instance
from ..netgraph import shortest_path_tree
from .model import BINARY, CONTINUOUS, MilpModel


def naive_big_m(instance: Instance) -> int:
    """``(|N|-1) max c + (sum_t a_t - 1) delta`` on the single-root network.

    Kept for reference only: it can be smaller than the slack of a
    non-tree arc (e.g. root->1->2 plus root->2, all weights 1, node 1
    interdicted gives slack 1 + (1 + delta) - 1 = delta + 1 > 2), which
    would cut off feasible interdictions. :func:`big_m` is used instead.
    """
    network, _ = instance.reduced()
    return (network.node_count - 1) * network.max_weight() + (instance.total_capacity() - 1) * instance.delta


def big_m(instance: Instance, node_count: int | None = None) -> int:
    """Upper bound on any arc's reduced cost ``lambda_i + c^z_ij - lambda_j``.

    ``lambda_j >= 0`` and the tree path to ``i`` extended by ``ij`` has at
    most ``|N|`` arcs (``|N|`` when ``ij`` closes a cycle at the root), with
    at most one delay per interdicted node.
    """
    network, _ = instance.reduced()
    n = network.node_count if node_count is None else node_count
    k = min(instance.total_capacity(), len(instance.candidate_nodes()))
    return n * network.max_weight() + k * instance.delta


def _tag(t) -> str:
    return str(t).replace("/", "_")


def build_direct_mip(instance: Instance) -> MilpModel:
    """Transcribe the direct MIP for ``instance``.

    Multiple ignitions go through the super-source reduction first. Nodes
    that the fire can never reach are left out; they are protected under
    every plan. The fire-timing constraint is written as
    ``t * z_nt - lambda_n <= 0`` (the ``t``-scaled form, which is also
    well defined at ``t = 0``), and protection as ``psi * y_n + lambda_n >= psi``.
    """
    network, root = instance.reduced()
    reach = shortest_path_tree(network, root).dist
    nodes = [v for v in range(network.node_count) if reach[v] != float("inf")]
    node_set = set(nodes)
    arcs = [(k, i, j, w) for k, (i, j, w) in enumerate(network.arcs) if i in node_set and j in node_set]
    real = [v for v in nodes if v < instance.n]
    cand = [v for v in real if v not in instance.ignitions]
    n_tree = len(nodes)
    M = big_m(instance, n_tree)
    lam_ub = (n_tree - 1) * network.max_weight() + min(instance.total_capacity(), len(cand)) * instance.delta

    # presolve=False: the HiGHS bundled with SciPy 1.15 returns a suboptimal "optimal" on some of these models
    m = MilpModel(metadata={"instance": instance.id, "formulation": "direct", "big_m": M, "root": root,
                            "presolve": False})
    x, s, q, lam, y, z = {}, {}, {}, {}, {}, {}
    for _, i, j, _ in arcs:
        x[i, j] = m.add_column(f"x_{i}_{j}", CONTINUOUS, 0, n_tree - 1)
    for v in nodes:
        lam[v] = m.add_column(f"lam_{v}", CONTINUOUS, 0, 0 if v == root else lam_ub)
    for _, i, j, _ in arcs:
        s[i, j] = m.add_column(f"s_{i}_{j}", CONTINUOUS, 0, M)
    for _, i, j, _ in arcs:
        q[i, j] = m.add_column(f"q_{i}_{j}", BINARY)
    for v in cand:
        for t in instance.periods:
            z[v, t] = m.add_column(f"z_{v}_{_tag(t)}", BINARY)
    for v in real:
        y[v] = m.add_column(f"y_{v}", BINARY, obj=1)

    out_arcs = {v: [] for v in nodes}
    in_arcs = {v: [] for v in nodes}
    for _, i, j, _ in arcs:
        out_arcs[i].append((i, j))
        in_arcs[j].append((i, j))

    m.add_row("flow_root", "=", n_tree - 1, {x[a]: 1 for a in out_arcs[root]})
    for v in nodes:
        if v == root:
            continue
        terms = {x[a]: 1 for a in in_arcs[v]}
        for a in out_arcs[v]:
            terms[x[a]] = terms.get(x[a], 0) - 1
        m.add_row(f"flow_{v}", "=", 1, terms)
    for _, i, j, w in arcs:
        terms = {lam[j]: 1, lam[i]: -1, s[i, j]: 1}
        for t in instance.periods:
            if (i, t) in z:
                terms[z[i, t]] = -instance.delta
        m.add_row(f"dual_{i}_{j}", "=", w, terms)
    m.add_row("lam_root", "=", 0, {lam[root]: 1})
    for a in x:
        m.add_row(f"tree_{a[0]}_{a[1]}", "<=", 0, {x[a]: 1, q[a]: -(n_tree - 1)})
    for a in s:
        m.add_row(f"slack_{a[0]}_{a[1]}", "<=", M, {s[a]: 1, q[a]: M})
    for t in instance.periods:
        m.add_row(f"cap_{_tag(t)}", "<=", instance.capacity[t], {z[v, t]: 1 for v in cand}, group="capacity")
    for v in cand:
        m.add_row(f"once_{v}", "<=", 1, {z[v, t]: 1 for t in instance.periods}, group="unique")
    for v in cand:
        for t in instance.periods:
            if t:
                m.add_row(f"timing_{v}_{_tag(t)}", "<=", 0, {z[v, t]: t, lam[v]: -1})
    for v in real:
        m.add_row(f"protect_{v}", ">=", instance.psi, {y[v]: instance.psi, lam[v]: 1})
    return m


def plan_from_values(instance: Instance, names: list[str], values: list) -> InterdictionPlan:
    """Read the ``z_n_t`` columns of a solution as a plan."""
    by_tag = {_tag(t): t for t in instance.periods}
    placements = []
    for name, v in zip(names, values):
        if name.startswith("z_") and v > 0.5:
            _, node, tag = name.split("_", 2)
            placements.append((int(node), by_tag[tag]))
    return InterdictionPlan(placements)

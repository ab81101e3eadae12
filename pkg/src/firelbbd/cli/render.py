"""Text and SVG pictures of arrival times, binding paths and interdictions."""

from __future__ import annotations

from xml.sax.saxutils import escape

from ..firedyn import InterdictionPlan, evaluate
from ..instance import Instance
from ..netgraph import INF


def _fmt(d) -> str:
    if d == INF:
        return "inf"
    return str(d)


def _tree_arcs(instance: Instance, dyn) -> set:
    """(tail, head) arcs of the binding paths to unprotected nodes."""
    network = dyn.network
    out = set()
    for n in dyn.unprotected:
        v = n
        while dyn.tree.pred[v] is not None:
            i, j, _ = network.arcs[dyn.tree.pred[v]]
            if i >= instance.n:
                break
            out.add((i, j))
            v = i
    return out


def is_grid(instance: Instance) -> bool:
    return instance.labels is not None and len(set(instance.labels)) == instance.n


def render_text(instance: Instance, plan: InterdictionPlan | None = None) -> str:
    """Grid of arrival times; non-grid instances fall back to an adjacency listing.

    Markers: ``I`` ignition, ``*`` interdicted, ``!`` infeasible placement,
    ``.`` protected (arrival at or after psi).
    """
    plan = plan or InterdictionPlan()
    dyn = evaluate(instance, plan)
    hot = plan.nodes
    bad = {n for n, _ in dyn.violations}

    def mark(n):
        if n in instance.ignitions:
            return "I"
        if n in bad:
            return "!"
        if n in hot:
            return "*"
        return " " if n in dyn.unprotected else "."

    lines = [f"# {instance.id}: psi={instance.psi} delta={instance.delta} "
             f"unprotected={len(dyn.unprotected)} interdicted={len(hot)}"]
    if not is_grid(instance):
        lines.append("# no grid labels; adjacency listing (node arrival marker: successors)")
        for n in range(instance.n):
            succ = " ".join(f"{instance.network.arcs[k][1]}({instance.network.arcs[k][2]})" for k in instance.network.out_arcs[n])
            lines.append(f"{n:>4} {_fmt(dyn.arrivals[n]):>5}{mark(n)}: {succ}")
        return "\n".join(lines) + "\n"
    rows = max(r for r, _ in instance.labels) + 1
    cols = max(c for _, c in instance.labels) + 1
    where = {lab: n for n, lab in enumerate(instance.labels)}
    width = max(len(_fmt(d)) for d in dyn.arrivals) + 1
    for r in range(rows):
        cells = []
        for c in range(cols):
            n = where.get((r, c))
            cells.append(" " * (width + 1) if n is None else f"{_fmt(dyn.arrivals[n]):>{width}}{mark(n)}")
        lines.append(" ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def render_svg(instance: Instance, plan: InterdictionPlan | None = None, cell: int = 36) -> str:
    """Figure of the grid: binding-path arcs, safe nodes pale, interdictions ringed."""
    plan = plan or InterdictionPlan()
    dyn = evaluate(instance, plan)
    if not is_grid(instance):
        body = escape(render_text(instance, plan))
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="800" height="{14 * (instance.n + 3)}">'
                f'<text font-family="monospace" font-size="11" xml:space="preserve">'
                + "".join(f'<tspan x="4" dy="14">{ln}</tspan>' for ln in body.splitlines())
                + "</text></svg>\n")
    rows = max(r for r, _ in instance.labels) + 1
    cols = max(c for _, c in instance.labels) + 1
    pad = cell // 2

    def xy(n):
        r, c = instance.labels[n]
        return pad + c * cell + cell // 2, pad + r * cell + cell // 2

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{cols * cell + 2 * pad}" '
             f'height="{rows * cell + 2 * pad + 20}" font-family="sans-serif">',
             '<defs><marker id="a" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto">'
             '<path d="M0,0 L6,3 L0,6 z" fill="#b33"/></marker></defs>']
    for i, j in sorted(_tree_arcs(instance, dyn)):
        (x1, y1), (x2, y2) = xy(i), xy(j)
        parts.append(f'<line x1="{x1}" y1="{y1}" x2="{(x1 + 2 * x2) / 3:.1f}" y2="{(y1 + 2 * y2) / 3:.1f}" '
                     'stroke="#b33" stroke-width="1.5" marker-end="url(#a)"/>')
    r = cell * 0.32
    bad = {n for n, _ in dyn.violations}
    for n in range(instance.n):
        x, y = xy(n)
        if n in instance.ignitions:
            fill = "#d22"
        elif n in dyn.unprotected:
            fill = "#f6a04d"
        else:
            fill = "#e8f2e0"
        stroke, sw = ("#1450b4", 3) if n in plan.nodes else ("#777", 0.6)
        if n in bad:
            stroke = "#000"
        parts.append(f'<circle cx="{x}" cy="{y}" r="{r:.1f}" fill="{fill}" stroke="{stroke}" stroke-width="{sw}"/>')
        parts.append(f'<text x="{x}" y="{y + 3}" font-size="{cell // 4}" text-anchor="middle">'
                     f'{escape(_fmt(dyn.arrivals[n]))}</text>')
    parts.append(f'<text x="{pad}" y="{rows * cell + 2 * pad + 12}" font-size="11">'
                 f'{escape(instance.id)}: unprotected {len(dyn.unprotected)}, interdicted {len(plan.nodes)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

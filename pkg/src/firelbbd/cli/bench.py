"""Benchmark matrix: instances x methods, resumable records, summary tables and profiles.

A manifest is a JSON object::

    {
     "instances": ["small:0", "small:1", "path/to/instance.json"],
     "seeds": [1, 2, 3],
     "time_limit": 60,
     "preprocess": true,
     "methods": [
      {"label": "lbbd", "method": "lbbd-exact", "warm_start": "greedy"},
      {"label": "mip", "method": "mip-direct", "backend": "external"}
     ]
    }

Preset names are expanded once per seed; instance files are used as is.
Method entries accept every :class:`RunConfig` field plus ``label``.
"""

from __future__ import annotations

import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, fields
from pathlib import Path

from .. import instance as inst_io
from ..instance import LARGE_PRESETS, SMALL_PRESETS, Instance
from ..milp import ExternalConfig
from .records import RunConfig, RunRecord, config_hash, default_time_limit, run_method

RECORDS = "records.jsonl"


@dataclass
class BenchTask:
    source: str  # preset name or instance path
    seed: int | None
    label: str
    config: RunConfig

    def load(self) -> Instance:
        if ":" in self.source and not Path(self.source).exists():
            return inst_io.preset(self.source, self.seed or 0)
        return inst_io.load(self.source)


def _expand_sources(names) -> list[str]:
    out = []
    for name in names:
        if name == "small":
            out.extend(SMALL_PRESETS)
        elif name == "large":
            out.extend(LARGE_PRESETS)
        else:
            out.append(name)
    return out


def load_manifest(path_or_dict) -> list[BenchTask]:
    m = path_or_dict if isinstance(path_or_dict, dict) else json.loads(Path(path_or_dict).read_text())
    names = [f.name for f in fields(RunConfig)]
    seeds = m.get("seeds", [0])
    limit = m.get("time_limit", default_time_limit())
    tasks = []
    for source in _expand_sources(m.get("instances", [])):
        is_preset = ":" in source and not Path(source).exists()
        for seed in (seeds if is_preset else [None]):
            for spec in m.get("methods", [{"method": "lbbd-exact"}]):
                unknown = set(spec) - set(names) - {"label"}
                if unknown:
                    raise ValueError(f"manifest method entry has unknown keys {sorted(unknown)}")
                kw = {k: v for k, v in spec.items() if k != "label"}
                kw.setdefault("time_limit", limit)
                kw.setdefault("preprocess", m.get("preprocess", True))
                cfg = RunConfig(**kw)
                tasks.append(BenchTask(source, seed, spec.get("label", cfg.method), cfg))
    return tasks


def read_records(path) -> list[RunRecord]:
    path = Path(path)
    if not path.exists():
        return []
    out = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if line:
            try:
                out.append(RunRecord.from_json(line))
            except (ValueError, TypeError):
                continue  # a torn last line from an interrupted run
    return out


def _run_task(task: BenchTask) -> str:
    inst = task.load()
    ext = ExternalConfig.from_env() if task.config.backend == "external" else None
    rec = run_method(inst, task.config, task.seed, ext).record
    rec.label = task.label
    return rec.to_json()


def run_bench(tasks: list[BenchTask], out_dir, jobs: int = 1, log=print) -> list[RunRecord]:
    """Run every task not already recorded in ``out_dir/records.jsonl``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rec_path = out_dir / RECORDS
    done = {(r.label, r.config_hash) for r in read_records(rec_path)}
    todo = []
    for task in tasks:
        key = (task.label, config_hash(task.load(), task.config))
        if key not in done:
            todo.append(task)
            done.add(key)
    log(f"{len(tasks) - len(todo)} runs already recorded, {len(todo)} to go")
    with rec_path.open("a") as fh:
        def emit(line):
            fh.write(line + "\n")
            fh.flush()
            r = RunRecord.from_json(line)
            log(f"{r.instance:<18} {r.label:<12} {r.status:<8} obj={r.objective} lb={r.lower_bound} "
                f"t={r.wall_time:.2f}s")

        if jobs <= 1:
            for task in todo:
                emit(_run_task(task))
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_run_task, t) for t in todo]
                for fut in as_completed(futures):
                    emit(fut.result())
    return read_records(rec_path)


def _family(instance_id: str) -> str:
    head, sep, tail = instance_id.rpartition("-s")
    return head if sep and tail.isdigit() else instance_id


def _mean_sd(xs):
    if not xs:
        return math.nan, math.nan
    return statistics.fmean(xs), (statistics.stdev(xs) if len(xs) > 1 else 0.0)


def summary_rows(records: list[RunRecord]) -> tuple[list[str], list[dict]]:
    """Per instance family: mean/SD objective over proven optima, mean/SD time per method label."""
    labels = sorted({r.label for r in records})
    fams: dict[str, list[RunRecord]] = {}
    for r in records:
        fams.setdefault(_family(r.instance), []).append(r)
    rows = []
    for fam in sorted(fams, key=_natural):
        recs = fams[fam]
        objs = {}
        for r in recs:
            if r.status == "optimal":
                objs.setdefault(r.instance, r.objective)
        row = {"id": fam}
        row["obj_mean"], row["obj_sd"] = _mean_sd(list(objs.values()))
        for lab in labels:
            times = [r.wall_time for r in recs if r.label == lab]
            solved = sum(1 for r in recs if r.label == lab and r.status == "optimal")
            row[f"{lab}_time_mean"], row[f"{lab}_time_sd"] = _mean_sd(times)
            row[f"{lab}_solved"] = f"{solved}/{len(times)}"
        rows.append(row)
    return labels, rows


def _natural(s: str):
    return [int(p) if p.isdigit() else p for p in s.replace(":", "-").split("-")]


def format_summary(records: list[RunRecord]) -> str:
    labels, rows = summary_rows(records)
    head = f"{'ID':<16} {'Av Obj':>8} {'Obj SD':>7}"
    for lab in labels:
        head += f" | {lab + ' Av Time':>16} {'Time SD':>8} {'solved':>7}"
    lines = [head, "-" * len(head)]
    for row in rows:
        line = f"{row['id']:<16} {row['obj_mean']:>8.2f} {row['obj_sd']:>7.2f}"
        for lab in labels:
            line += (f" | {row[f'{lab}_time_mean']:>16.2f} {row[f'{lab}_time_sd']:>8.2f}"
                     f" {row[f'{lab}_solved']:>7}")
        lines.append(line)
    return "\n".join(lines) + "\n"


def profile_points(records: list[RunRecord]) -> dict[str, list[tuple[float, float]]]:
    """Fraction of each label's runs proven optimal within time t, as a step curve."""
    out = {}
    for lab in sorted({r.label for r in records}):
        recs = [r for r in records if r.label == lab]
        times = sorted(r.wall_time for r in recs if r.status == "optimal")
        total = len(recs)
        out[lab] = [(t, (k + 1) / total) for k, t in enumerate(times)]
    return out


def write_profile_csv(records: list[RunRecord], path) -> None:
    lines = ["label,time,fraction_solved"]
    for lab, pts in profile_points(records).items():
        lines.extend(f"{lab},{t:.6f},{f:.6f}" for t, f in pts)
    Path(path).write_text("\n".join(lines) + "\n")


def profile_svg(records: list[RunRecord], width: int = 520, height: int = 340) -> str:
    """Log-time performance profile; one step curve per method label."""
    pts = profile_points(records)
    all_t = [t for p in pts.values() for t, _ in p] or [1.0]
    lo = math.floor(math.log10(max(min(all_t), 1e-3)))
    hi = max(math.ceil(math.log10(max(all_t))), lo + 1)
    ml, mr, mt, mb = 50, 110, 15, 40
    pw, ph = width - ml - mr, height - mt - mb

    def sx(t):
        return ml + pw * (math.log10(max(t, 10 ** lo)) - lo) / (hi - lo)

    def sy(f):
        return mt + ph * (1 - f)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    for e in range(lo, hi + 1):
        x = sx(10 ** e)
        out.append(f'<line x1="{x:.1f}" y1="{mt + ph}" x2="{x:.1f}" y2="{mt + ph + 4}" stroke="#444"/>')
        out.append(f'<text x="{x:.1f}" y="{mt + ph + 16}" text-anchor="middle">1e{e}</text>')
    for k in range(0, 101, 25):
        y = sy(k / 100)
        out.append(f'<text x="{ml - 6}" y="{y + 4:.1f}" text-anchor="end">{k}%</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 6}" text-anchor="middle">time (s)</text>')
    for idx, (lab, p) in enumerate(pts.items()):
        color = colors[idx % len(colors)]
        path = [f"M{sx(10 ** lo):.1f},{sy(0):.1f}"]
        prev = 0.0
        for t, f in p:
            path.append(f"L{sx(t):.1f},{sy(prev):.1f} L{sx(t):.1f},{sy(f):.1f}")
            prev = f
        path.append(f"L{sx(10 ** hi):.1f},{sy(prev):.1f}")
        out.append(f'<path d="{" ".join(path)}" fill="none" stroke="{color}" stroke-width="1.6"/>')
        out.append(f'<text x="{ml + pw + 8}" y="{mt + 14 + 16 * idx}" fill="{color}">{lab}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_outputs(records: list[RunRecord], out_dir) -> None:
    out_dir = Path(out_dir)
    (out_dir / "summary.txt").write_text(format_summary(records))
    write_profile_csv(records, out_dir / "profile.csv")
    (out_dir / "profile.svg").write_text(profile_svg(records))

"""Command line: ``firelbbd gen | solve | bench | render | validate``.

Environment overrides:

* ``FIRELBBD_TIME_LIMIT``: default time limit in seconds for solve and bench.
* ``FIRELBBD_SOLVER``, ``FIRELBBD_SOLVER_FORMAT``, ``FIRELBBD_SOLVER_CONFIG``:
  the external MILP command used by ``--backend external``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .. import instance as inst_io
from ..firedyn import InterdictionPlan
from ..instance import GridSpec, InstanceError, large_spec, small_spec
from ..milp import ExternalConfig, verify_solution
from . import bench as bench_mod
from .records import METHODS, RunConfig, default_time_limit, read_solution, run_method, write_solution
from .render import render_svg, render_text


def _pair(text: str) -> tuple[int, int]:
    a, b = text.split(",")
    return int(a), int(b)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x)


def _err(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def cmd_gen(args) -> int:
    spec = None
    inst_id = args.id
    if args.preset:
        family, _, key = args.preset.partition(":")
        if family == "small":
            spec = small_spec(int(key), args.seed)
            inst_id = inst_id or f"small-{int(key)}-s{args.seed}"
        elif family == "large" and len(key) == 3:
            spec = large_spec(int(key[1]), key[2], args.seed)
            inst_id = inst_id or f"large-{key}-s{args.seed}"
        else:
            raise InstanceError("preset", f"unknown preset {args.preset!r}")
    overrides = {}
    for name, key in (("rows", "rows"), ("cols", "cols"), ("psi", "psi"), ("delta", "delta")):
        if getattr(args, name) is not None:
            overrides[key] = getattr(args, name)
    for name in ("ignition", "north", "south", "east", "west"):
        v = getattr(args, name)
        if v is not None:
            overrides["ignition" if name == "ignition" else f"dist_{name}"] = v
    if args.periods is not None:
        overrides["periods"] = args.periods
    if args.capacity is not None:
        overrides["capacity"] = args.capacity
    if spec is None:
        missing = [k for k in ("rows", "cols", "ignition", "dist_north", "dist_south", "dist_east", "dist_west")
                   if k not in overrides]
        if missing:
            return _err("without --preset these flags are required: " + ", ".join(missing))
        if "periods" in overrides and "capacity" not in overrides:
            overrides["capacity"] = (1,) * len(overrides["periods"])
        spec = GridSpec(seed=args.seed, **overrides)
    else:
        if "periods" in overrides and "capacity" not in overrides:
            overrides["capacity"] = (spec.capacity[0],) * len(overrides["periods"])
        spec = replace(spec, **overrides)
    inst = inst_io.generate_grid(spec, id=inst_id)
    text = inst_io.dumps(inst)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}: {inst.n} nodes, {inst.network.arc_count} arcs", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def cmd_solve(args) -> int:
    inst = inst_io.load(args.instance)
    limit = args.time_limit if args.time_limit is not None else default_time_limit()
    config = RunConfig(args.method, args.mode, args.backend, args.warm_start, args.cut_window, limit, args.preprocess)
    ext = None
    if args.backend == "external":
        ext = ExternalConfig.from_env(args.solver_config)
    outcome = run_method(inst, config, inst.generator.get("seed") if inst.generator else None, ext,
                         cut_pool=args.cut_pool)
    rec = outcome.record
    if args.records:
        with open(args.records, "a") as fh:
            fh.write(rec.to_json() + "\n")
    else:
        print(rec.to_json())
    if args.solution and outcome.plan is not None:
        write_solution(args.solution, inst, outcome.plan, rec.objective, rec.method)
    print(f"{rec.instance}: {rec.method} {rec.status} objective={rec.objective} bound={rec.lower_bound} "
          f"time={rec.wall_time:.2f}s opt_cuts={rec.opt_cuts} feas_cuts={rec.feas_cuts}", file=sys.stderr)
    return 0 if rec.objective is not None else 1


def cmd_bench(args) -> int:
    if args.manifest:
        manifest = json.loads(Path(args.manifest).read_text())
    else:
        methods = []
        for m in args.methods.split(","):
            entry = {"label": m, "method": m}
            if m == "lbbd-exact":
                entry["warm_start"] = "greedy"
            if m == "mip-direct":
                entry["backend"] = args.mip_backend
            methods.append(entry)
        manifest = {
            "instances": args.instances.split(","),
            "seeds": list(range(1, args.seeds + 1)),
            "methods": methods,
            "preprocess": True,
        }
    if args.time_limit is not None:
        manifest["time_limit"] = args.time_limit
        for m in manifest.get("methods", []):
            m["time_limit"] = args.time_limit
    tasks = bench_mod.load_manifest(manifest)
    records = bench_mod.run_bench(tasks, args.out_dir, jobs=args.jobs,
                                  log=(lambda s: None) if args.quiet else (lambda s: print(s, file=sys.stderr)))
    bench_mod.write_outputs(records, args.out_dir)
    sys.stdout.write(bench_mod.format_summary(records))
    return 0


def cmd_render(args) -> int:
    inst = inst_io.load(args.instance)
    plan = read_solution(args.solution)[0] if args.solution else InterdictionPlan()
    problems = plan.problems(inst)
    if problems:
        return _err("; ".join(problems))
    text = render_svg(inst, plan) if args.format == "svg" else render_text(inst, plan)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args) -> int:
    inst = inst_io.load(args.instance)
    plan, doc = read_solution(args.solution)
    report = verify_solution(inst, plan, doc.get("objective"))
    if report.ok:
        print(f"ok: {len(plan)} placements, objective {report.objective}")
        return 0
    print("invalid solution:")
    for p in report.problems:
        print(f"  {p}")
    return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="firelbbd", description="Wildfire suppression-resource interdiction solver.")
    sub = p.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gen", help="generate a grid instance")
    g.add_argument("--preset", help="small:0..23 or large:L0A..L7B")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", help="instance file (default: stdout)")
    g.add_argument("--id")
    g.add_argument("--rows", type=int)
    g.add_argument("--cols", type=int)
    g.add_argument("--ignition", type=_pair, help="row,col")
    g.add_argument("--north", type=_pair, help="lo,hi travel time for north-pointing arcs")
    g.add_argument("--south", type=_pair)
    g.add_argument("--east", type=_pair)
    g.add_argument("--west", type=_pair)
    g.add_argument("--psi", type=int)
    g.add_argument("--delta", type=int)
    g.add_argument("--periods", type=_ints, help="comma-separated times")
    g.add_argument("--capacity", type=_ints, help="comma-separated resources per period")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--method", choices=METHODS, default="lbbd-exact")
    s.add_argument("--mode", choices=("iterative", "branch_and_check"), default="branch_and_check")
    s.add_argument("--backend", choices=("highs", "reference", "external"), default="highs")
    s.add_argument("--warm-start", help="'greedy' or a solution file")
    s.add_argument("--time-limit", type=float)
    s.add_argument("--preprocess", action="store_true")
    s.add_argument("--cut-window", choices=("wide", "unit"), default="wide",
                   help="optimality-cut window: resilience-widened or single delay")
    s.add_argument("--records", help="append the run record to this JSONL file instead of stdout")
    s.add_argument("--solution", help="write the plan to this file")
    s.add_argument("--cut-pool", help="dump LBBD cuts to this file")
    s.add_argument("--solver-config", help="external solver JSON config")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run an instances x methods matrix")
    b.add_argument("manifest", nargs="?")
    b.add_argument("--instances", default="small", help="presets/files, or 'small'/'large' (no manifest)")
    b.add_argument("--seeds", type=int, default=10)
    b.add_argument("--methods", default="lbbd-exact,mip-direct")
    b.add_argument("--mip-backend", default="highs", choices=("highs", "external"))
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--time-limit", type=float)
    b.add_argument("--out-dir", default="bench-out")
    b.add_argument("--quiet", action="store_true")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("render", help="draw arrival times and interdictions")
    r.add_argument("instance")
    r.add_argument("--solution")
    r.add_argument("--format", choices=("text", "svg"), default="text")
    r.add_argument("--out")
    r.set_defaults(func=cmd_render)

    v = sub.add_parser("validate", help="check a solution file against an instance")
    v.add_argument("instance")
    v.add_argument("solution")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "gen" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except (InstanceError, ValueError, OSError) as exc:
        return _err(str(exc))


if __name__ == "__main__":
    sys.exit(main())

"""Run an external MILP solver through MPS files.

Configuration comes from, in increasing priority: the built-in presets,
a JSON config file (``FIRELBBD_SOLVER_CONFIG`` or an explicit path), and
the environment variables ``FIRELBBD_SOLVER`` (preset name or path to an
executable) and ``FIRELBBD_SOLVER_FORMAT``.

Command templates may use ``{model}``, ``{solution}``, ``{options}`` and
``{limit_args}``; the last expands to ``time_limit_args`` with
``{seconds}`` filled in, or to nothing when no limit is set.

Solution grammars
-----------------
``cbc`` (``-solu`` output)::

    <status words> - objective value <number>
    [**] <index> <column> <value> <reduced cost>
    ...

``highs`` (``--solution_file`` output)::

    Model status
    <status>
    ...
    # Primal solution values
    <Feasible|Infeasible|None>
    Objective <number>
    # Columns <count>
    <column> <value>
    ...
    # Rows <count>
"""

from __future__ import annotations

import json
import os
import re
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import mps
from .model import BINARY, BackendFailure, BackendResult, Limits, MilpModel

PRESETS = {
    "cbc": dict(
        executable="cbc",
        args=["{model}", "{limit_args}", "-ratioGap", "0", "-allowableGap", "0",
              "-threads", "1", "-solve", "-solu", "{solution}"],
        time_limit_args=["-timeMode", "elapsed", "-sec", "{seconds}"],
        format="cbc",
        options="",
    ),
    "highs": dict(
        executable="highs",
        args=["--model_file", "{model}", "--solution_file", "{solution}",
              "--options_file", "{options}", "{limit_args}"],
        time_limit_args=["--time_limit", "{seconds}"],
        format="highs",
        options="mip_rel_gap = 0\nmip_abs_gap = 0\nthreads = 1\n",
    ),
}


class ExternalSolverError(BackendFailure):
    pass


@dataclass
class ExternalConfig:
    executable: str
    args: list = field(default_factory=list)
    time_limit_args: list = field(default_factory=list)
    format: str = "cbc"
    options: str = ""
    workdir: str | None = None

    @classmethod
    def preset(cls, name: str) -> "ExternalConfig":
        if name not in PRESETS:
            raise ExternalSolverError(f"unknown solver preset {name!r}")
        return cls(**PRESETS[name])

    @classmethod
    def from_file(cls, path) -> "ExternalConfig":
        data = json.loads(Path(path).read_text())
        base = PRESETS.get(data.get("preset", data.get("format", "cbc")), PRESETS["cbc"])
        merged = {**base, **{k: v for k, v in data.items() if k != "preset"}}
        return cls(**merged)

    @classmethod
    def from_env(cls, path=None, env=None) -> "ExternalConfig | None":
        """Resolve the configured solver, or None when nothing is configured."""
        env = os.environ if env is None else env
        path = path or env.get("FIRELBBD_SOLVER_CONFIG")
        config = cls.from_file(path) if path else None
        solver = env.get("FIRELBBD_SOLVER")
        if solver:
            if solver in PRESETS:
                config = cls.preset(solver)
            else:
                fmt = env.get("FIRELBBD_SOLVER_FORMAT") or Path(solver).name.split(".")[0]
                base = cls.preset(fmt if fmt in PRESETS else "cbc")
                config = replace(base, executable=solver)
        if config is not None and env.get("FIRELBBD_SOLVER_FORMAT"):
            config = replace(config, format=env["FIRELBBD_SOLVER_FORMAT"])
        return config

    def resolve_executable(self) -> str:
        exe = shutil.which(self.executable) or (self.executable if Path(self.executable).is_file() else None)
        if exe is None and self.executable == "cbc":
            exe = find_cbc()
        if exe is None:
            raise ExternalSolverError(f"solver executable {self.executable!r} not found")
        return exe

    def command(self, model_path, solution_path, options_path, seconds) -> list[str]:
        subs = {"model": str(model_path), "solution": str(solution_path),
                "options": str(options_path), "seconds": "" if seconds is None else f"{seconds:.3f}"}
        cmd = [self.resolve_executable()]
        for a in self.args:
            if a == "{limit_args}":
                if seconds is not None:
                    cmd.extend(x.format(**subs) for x in self.time_limit_args)
            elif a == "{options}" and not self.options:
                if cmd and cmd[-1].startswith("--options"):
                    cmd.pop()
            else:
                cmd.append(a.format(**subs))
        return cmd


@dataclass
class ParsedSolution:
    status: str
    objective: float | None
    values: dict  # column code -> value


def _num(s: str) -> float:
    return float(s)


def parse_cbc(text: str) -> ParsedSolution:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ExternalSolverError("empty CBC solution file")
    head = lines[0].lower()
    m = re.search(r"objective value\s+(\S+)", head)
    objective = _num(m.group(1)) if m else None
    if "no integer solution" in head:
        # CBC reports the LP relaxation here; it is not a plan
        return ParsedSolution("limit", None, {})
    if head.startswith("optimal"):
        status = "optimal"
    elif "infeasible" in head:
        status = "infeasible"
    elif head.startswith("stopped") or "integer" in head:
        status = "feasible"
    elif head.startswith("unbounded"):
        status = "infeasible"
    else:
        raise ExternalSolverError(f"unrecognised CBC status line {lines[0]!r}")
    values = {}
    for ln in lines[1:]:
        f = ln.split()
        if f and f[0] == "**":
            f = f[1:]
        if len(f) < 3:
            raise ExternalSolverError(f"bad CBC solution line {ln!r}")
        values[f[1]] = _num(f[2])
    if status == "feasible" and not values:
        status = "limit"
    return ParsedSolution(status, objective, values)


def parse_highs(text: str) -> ParsedSolution:
    lines = [ln.strip() for ln in text.splitlines()]
    try:
        k = lines.index("Model status")
    except ValueError:
        raise ExternalSolverError("HiGHS solution file has no 'Model status'") from None
    raw_status = lines[k + 1].lower()
    values: dict = {}
    objective = None
    primal_ok = False
    i = k + 2
    while i < len(lines):
        ln = lines[i]
        if ln == "# Primal solution values":
            primal_ok = lines[i + 1].lower() == "feasible"
            i += 2
            continue
        if ln.startswith("Objective ") and objective is None:
            objective = _num(ln.split()[1])
        elif ln.startswith("# Columns"):
            count = int(ln.split()[2])
            for ln2 in lines[i + 1:i + 1 + count]:
                name, val = ln2.split()[:2]
                values[name] = _num(val)
            i += count
        elif ln.startswith("# Rows") or ln.startswith("# Dual"):
            break
        i += 1
    if raw_status == "optimal":
        status = "optimal"
    elif "infeasible" in raw_status:
        status = "infeasible"
    elif primal_ok:
        status = "feasible"
    else:
        status = "limit"
    return ParsedSolution(status, objective, values)


PARSERS = {"cbc": parse_cbc, "highs": parse_highs}

_CBC_BOUND = re.compile(r"(?:Lower bound|Best possible)\s*:?\s*(-?[\d.eE+-]+)")


class ExternalBackend:
    name = "external"
    supports_callback = False

    def __init__(self, config: ExternalConfig):
        self.config = config

    def solve(self, model: MilpModel, callback=None, limits: Limits | None = None,
              start: list | None = None) -> BackendResult:
        if callback is not None:
            raise ExternalSolverError("external solvers run without incumbent hooks; use iterative mode")
        limits = (limits or Limits()).start()
        cfg = self.config
        parser = PARSERS.get(cfg.format)
        if parser is None:
            raise ExternalSolverError(f"no parser for solution format {cfg.format!r}")
        t0 = time.monotonic()
        with tempfile.TemporaryDirectory(dir=cfg.workdir) as tmp:
            model_path = Path(tmp) / "model.mps"
            sol_path = Path(tmp) / "model.sol"
            opt_path = Path(tmp) / "solver.opt"
            mps.write(model, model_path)
            if cfg.options:
                opt_path.write_text(cfg.options)
            seconds = limits.remaining()
            cmd = cfg.command(model_path, sol_path, opt_path, seconds)
            try:
                proc = subprocess.run(cmd, cwd=tmp, capture_output=True, text=True,
                                      timeout=None if seconds is None else 2 * seconds + 30)
            except FileNotFoundError as exc:
                raise ExternalSolverError(str(exc)) from None
            except subprocess.TimeoutExpired:
                return BackendResult("limit", wall_time=time.monotonic() - t0, message="solver process timed out")
            if not sol_path.exists():
                raise ExternalSolverError(
                    f"solver wrote no solution file (exit {proc.returncode}): {proc.stdout[-500:]}{proc.stderr[-500:]}"
                )
            parsed = parser(sol_path.read_text())
        wall = time.monotonic() - t0
        values = None
        if parsed.values or parsed.status in ("optimal", "feasible"):
            codes = {mps.col_code(j): j for j in range(len(model.columns))}
            values = [0.0] * len(model.columns)
            for code, v in parsed.values.items():
                if code in codes:
                    j = codes[code]
                    values[j] = float(round(v)) if model.columns[j].kind == BINARY and abs(v - round(v)) <= 1e-6 else v
        if parsed.status == "infeasible":
            return BackendResult("infeasible", wall_time=wall, message=proc.stdout[-2000:])
        objective = model.objective_value(values) if values is not None else None
        bound = objective if parsed.status == "optimal" else None
        if bound is None:
            m = _CBC_BOUND.search(proc.stdout)
            if m:
                bound = float(m.group(1))
        return BackendResult(parsed.status, values, objective, bound, wall_time=wall, message=proc.stdout[-2000:])


def solve_external(model: MilpModel, config: ExternalConfig, limits: Limits | None = None) -> BackendResult:
    return ExternalBackend(config).solve(model, limits=limits)


def find_cbc() -> str | None:
    """Locate a CBC binary on PATH or the one bundled with PuLP."""
    exe = shutil.which("cbc")
    if exe:
        return exe
    try:
        import pulp  # optional; only used to find its bundled binary
    except ImportError:
        return None
    path = Path(pulp.__file__).parent / "solverdir" / "cbc" / "linux" / "i64" / "cbc"
    return str(path) if path.is_file() and os.access(path, os.X_OK) else None

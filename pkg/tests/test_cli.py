from __future__ import annotations

import json

import pytest

from firelbbd import instance as io
from firelbbd.cli import main
from firelbbd.cli.bench import format_summary, load_manifest, profile_points, read_records
from firelbbd.cli.records import RunConfig, config_hash, run_method
from firelbbd.firedyn import InterdictionPlan, evaluate
from firelbbd.instance import preset

from conftest import chain


def _gen(tmp_path, *extra, name="i.json"):
    out = tmp_path / name
    assert main(["gen", *extra, "--out", str(out)]) == 0
    return out


def test_gen_small_preset(tmp_path):
    p = _gen(tmp_path, "--preset", "small:0", "--seed", "1")
    inst = io.load(p)
    assert inst.n == 100 and inst.psi == 28 and inst.delta == 50 and inst.periods == (10, 15)
    q = _gen(tmp_path, "--preset", "small:0", "--seed", "1", name="j.json")
    assert p.read_bytes() == q.read_bytes()


def test_gen_large_preset(tmp_path):
    inst = io.load(_gen(tmp_path, "--preset", "large:L0B"))
    assert inst.delta == 30 and len(inst.periods) == 6


def test_gen_explicit_flags(tmp_path):
    inst = io.load(_gen(tmp_path, "--rows", "3", "--cols", "4", "--ignition", "1,1", "--north", "1,2",
                        "--south", "1,2", "--east", "1,2", "--west", "1,2", "--psi", "20", "--delta", "5",
                        "--periods", "2,4", "--capacity", "1,2", "--seed", "9"))
    assert inst.n == 12 and inst.capacity == {2: 1, 4: 2} and inst.ignitions == {5}


def test_gen_override_on_preset(tmp_path):
    inst = io.load(_gen(tmp_path, "--preset", "small:0", "--psi", "40"))
    assert inst.psi == 40 and inst.n == 100


def test_gen_missing_flags(tmp_path, capsys):
    assert main(["gen", "--rows", "3"]) == 2
    assert "required" in capsys.readouterr().err


def _solve(tmp_path, inst_path, method, *extra):
    rec = tmp_path / "rec.jsonl"
    sol = tmp_path / f"{method}.sol.json"
    rc = main(["solve", str(inst_path), "--method", method, "--records", str(rec), "--solution", str(sol), *extra])
    return rc, json.loads(rec.read_text().splitlines()[-1]), sol


def test_all_methods_agree_on_tiny(tmp_path):
    p = tmp_path / "t.json"
    io.save(chain([4, 5, 3], 15, 20, [3, 6], {3: 1, 6: 1}), p)
    objs = set()
    for m in ("lbbd-exact", "lbbd-greedy", "mip-direct", "brute-force"):
        rc, rec, sol = _solve(tmp_path, p, m)
        assert rc == 0 and rec["method"] == m and sol.exists()
        objs.add(rec["objective"])
    assert len(objs) == 1


def test_zero_capacity_all_methods(tmp_path):
    p = tmp_path / "z.json"
    io.save(chain([4, 5, 3], 15, 20, [3], {3: 0}), p)
    objs = {_solve(tmp_path, p, m)[1]["objective"] for m in ("lbbd-exact", "lbbd-greedy", "mip-direct", "brute-force")}
    assert objs == {4}


def test_solve_preprocess_and_warm_start(tmp_path):
    p = _gen(tmp_path, "--preset", "small:1", "--seed", "3")
    rc, g, _ = _solve(tmp_path, p, "lbbd-greedy", "--preprocess")
    rc, e, sol = _solve(tmp_path, p, "lbbd-exact", "--preprocess", "--warm-start", "greedy",
                        "--mode", "branch_and_check")
    assert e["status"] == "optimal" and e["objective"] <= g["objective"]
    assert main(["validate", str(p), str(sol)]) == 0
    rc, e2, _ = _solve(tmp_path, p, "lbbd-exact", "--preprocess", "--warm-start", str(sol))
    assert e2["objective"] == e["objective"]


def test_record_hash_reproducible():
    inst = preset("small:0", 1)
    cfg = RunConfig("lbbd-exact", preprocess=True)
    a = run_method(inst, cfg).record
    b = run_method(inst, cfg).record
    assert a.config_hash == b.config_hash == config_hash(inst, cfg)
    assert (a.objective, a.lower_bound) == (b.objective, b.lower_bound)
    assert config_hash(inst, RunConfig("lbbd-greedy")) != a.config_hash


def test_cut_pool_flag(tmp_path):
    p = _gen(tmp_path, "--preset", "small:0", "--seed", "2")
    pool = tmp_path / "cuts.txt"
    main(["solve", str(p), "--preprocess", "--cut-pool", str(pool), "--records", str(tmp_path / "r")])
    lines = pool.read_text().splitlines()
    assert lines and all(ln.startswith(("optimality", "feasibility")) for ln in lines)


def _write_sol(path, placements):
    path.write_text(json.dumps({"placements": placements}))


def test_validate_reports(tmp_path, capsys):
    p = tmp_path / "c.json"
    io.save(chain([3, 10, 4], 30, 50, [5, 8], {5: 1, 8: 1}), p)
    good = tmp_path / "good.json"
    _write_sol(good, [[2, 5]])
    assert main(["validate", str(p), str(good)]) == 0
    late = tmp_path / "late.json"
    _write_sol(late, [[1, 5]])  # fire reaches node 1 at 3
    capsys.readouterr()
    assert main(["validate", str(p), str(late)]) == 1
    assert "node 1 in period 5" in capsys.readouterr().out
    over = tmp_path / "over.json"
    _write_sol(over, [[2, 5], [3, 5]])
    assert main(["validate", str(p), str(over)]) == 1
    assert "period 5" in capsys.readouterr().out


def test_render_text_labels_match_arrivals(tmp_path, capsys):
    p = tmp_path / "g.json"
    main(["gen", "--rows", "3", "--cols", "3", "--ignition", "1,1", "--north", "2,2", "--south", "2,2",
          "--east", "3,3", "--west", "3,3", "--psi", "5", "--delta", "10", "--periods", "1",
          "--capacity", "1", "--out", str(p)])
    capsys.readouterr()
    assert main(["render", str(p)]) == 0
    out = capsys.readouterr().out.splitlines()[1:]
    inst = io.load(p)
    arr = evaluate(inst, InterdictionPlan()).arrivals
    cells = [tok.rstrip("I*.! ") for line in out for tok in line.split()]
    assert [int(c) for c in cells] == list(arr)


def test_render_marks_interdictions(tmp_path, capsys):
    p = tmp_path / "g.json"
    io.save(preset("small:0", 1), p)
    sol = tmp_path / "s.json"
    _write_sol(sol, [[35, 10], [46, 10]])
    main(["render", str(p), "--solution", str(sol)])
    text = capsys.readouterr().out
    assert text.count("*") == 2
    svg = tmp_path / "f.svg"
    assert main(["render", str(p), "--solution", str(sol), "--format", "svg", "--out", str(svg)]) == 0
    body = svg.read_text()
    assert body.startswith("<svg") and body.count('stroke="#1450b4"') == 2


def test_render_non_grid_fallback(tmp_path, capsys):
    p = tmp_path / "c.json"
    io.save(chain([3, 4], 30, 5, [1], {1: 1}), p)
    main(["render", str(p)])
    out = capsys.readouterr().out
    assert "adjacency" in out and "2(4)" in out


def test_bench_resumable(tmp_path):
    manifest = {
        "instances": ["small:0"],
        "seeds": [1, 2],
        "time_limit": 60,
        "methods": [{"label": "lbbd", "method": "lbbd-exact", "warm_start": "greedy"},
                    {"label": "greedy", "method": "lbbd-greedy"}],
    }
    mpath = tmp_path / "m.json"
    mpath.write_text(json.dumps(manifest))
    out = tmp_path / "out"
    assert main(["bench", str(mpath), "--out-dir", str(out), "--quiet"]) == 0
    recs = read_records(out / "records.jsonl")
    assert len(recs) == 4
    assert main(["bench", str(mpath), "--out-dir", str(out), "--quiet"]) == 0
    assert len(read_records(out / "records.jsonl")) == 4
    for f in ("summary.txt", "profile.csv", "profile.svg"):
        assert (out / f).exists()
    pts = profile_points(recs)
    for curve in pts.values():
        fr = [f for _, f in curve]
        assert fr == sorted(fr)
    assert pts["lbbd"][-1][1] == 1.0
    assert "small-0" in format_summary(recs)


def test_manifest_expansion():
    tasks = load_manifest({"instances": ["small"], "seeds": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
                           "methods": [{"method": "lbbd-exact"}, {"method": "mip-direct"}]})
    assert len(tasks) == 480
    with pytest.raises(ValueError):
        load_manifest({"instances": ["small:0"], "methods": [{"method": "lbbd-exact", "bogus": 1}]})


def test_bench_parallel_jobs(tmp_path):
    out = tmp_path / "o"
    assert main(["bench", "--instances", "small:0,small:8", "--seeds", "1", "--methods", "lbbd-exact",
                 "--jobs", "2", "--out-dir", str(out), "--quiet"]) == 0
    assert len(read_records(out / "records.jsonl")) == 2


def test_env_time_limit(monkeypatch):
    from firelbbd.cli.records import default_time_limit
    monkeypatch.setenv("FIRELBBD_TIME_LIMIT", "12.5")
    assert default_time_limit() == 12.5

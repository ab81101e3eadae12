from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from firelbbd.firedyn import InterdictionPlan, brute_force, enumerate_plans, evaluate, objective
from firelbbd.instance import Instance, preprocess, preset
from firelbbd.lbbd import (
    BendersCut,
    LBBDSolver,
    MasterProblem,
    feasibility_cut,
    greedy,
    infeasibility_depth,
    initial_cuts,
    optimality_cut,
    read_cut_pool,
    resilience,
    solve_lbbd,
    write_cut_pool,
)
from firelbbd.netgraph import Network

from conftest import chain, random_tiny, tiny_instances


def _arr(d):
    return {0: d}


@pytest.mark.parametrize("psi,d,delta,want", [(28, 10, 50, 1), (70, 10, 30, 2), (70, 69, 30, 1)])
def test_resilience(psi, d, delta, want):
    inst = chain([1], psi, delta, [0], {0: 1})
    assert resilience(inst, _arr(d), 0) == want


def test_resilience_rejects_protected():
    inst = chain([1], 28, 50, [0], {0: 1})
    with pytest.raises(ValueError):
        resilience(inst, _arr(28), 0)


@pytest.mark.parametrize("t,d,delta,want", [(15, 5, 50, 1), (60, 5, 30, 2)])
def test_infeasibility_depth(t, d, delta, want):
    inst = chain([1], 80, delta, [t], {t: 1})
    assert infeasibility_depth(inst, _arr(d), 0, t) == want


def test_infeasibility_depth_boundary():
    inst = chain([1], 80, 50, [10], {10: 1})
    with pytest.raises(ValueError):
        infeasibility_depth(inst, _arr(10), 0, 10)


def _path_instance(psi):
    # I=0 -> p=1 (12) -> n=2 (8): d(p)=12, d(n)=20
    return chain([12, 8], psi, 50, [10, 15], {10: 1, 15: 1})


def test_optimality_cut_window_r1():
    inst = _path_instance(28)
    empty = InterdictionPlan()
    cut = optimality_cut(inst, empty, evaluate(inst, empty), 2)
    assert cut.scale == 1 and cut.terms == ((1, 10),)
    assert cut.coefficients == {(1, 10): 1} and cut.constant == 1


def test_optimality_cut_window_r2():
    inst = _path_instance(80)
    empty = InterdictionPlan()
    cut = optimality_cut(inst, empty, evaluate(inst, empty), 2)
    assert cut.scale == 2 and cut.terms == ((1, 10), (1, 15))
    assert set(cut.coefficients.values()) == {Fraction(1, 2)}


def test_unit_window_has_unit_coefficients():
    inst = _path_instance(80)
    empty = InterdictionPlan()
    cut = optimality_cut(inst, empty, evaluate(inst, empty), 2, window="unit")
    assert cut.scale == 1 and cut.terms == ((1, 10),)


def test_optimality_cut_rejects_protected_node():
    inst = _path_instance(18)  # n arrives at 20
    empty = InterdictionPlan()
    with pytest.raises(ValueError):
        optimality_cut(inst, empty, evaluate(inst, empty), 2)


def test_feasibility_cut_q1():
    # resource at n=2 at t=25 but fire arrives at 20; p=1 could be interdicted at 10
    inst = chain([12, 8], 60, 50, [10, 25], {10: 1, 25: 1})
    plan = InterdictionPlan([(2, 25)])
    dyn = evaluate(inst, plan)
    assert dyn.violations == {(2, 25)}
    cut = feasibility_cut(inst, plan, dyn, 2, 25)
    assert cut.scale == 1 and cut.terms == ((1, 10),) and cut.anchor == (2, 25)
    assert not cut.satisfied(plan)
    assert cut.satisfied(InterdictionPlan())
    assert cut.satisfied(InterdictionPlan([(1, 10), (2, 25)]))
    with pytest.raises(ValueError):
        feasibility_cut(inst, plan, dyn, 1, 10)


def test_initial_cuts():
    red, _ = preprocess(preset("small:1", 2))
    cuts = initial_cuts(red)
    unprot = evaluate(red, InterdictionPlan()).unprotected
    assert sorted(c.target for c in cuts) == sorted(unprot)
    for c in cuts:
        assert c.kind == "optimality" and c.constant == 1
        assert set(c.coefficients.values()) <= {Fraction(1, c.scale)}


def test_master_rows_are_integral():
    red, _ = preprocess(preset("small:1", 2))
    mp = MasterProblem(red)
    for cut in initial_cuts(red):
        mp.add_cut(cut)
    for row in mp.model.rows:
        assert all(float(v).is_integer() for v in row.terms.values())
        assert float(row.rhs).is_integer()


def test_duplicate_cuts_suppressed():
    inst = _path_instance(28)
    mp = MasterProblem(inst)
    cut = initial_cuts(inst)[0]
    assert mp.add_cut(cut) and not mp.add_cut(cut)


def test_callback_accepts_matching_feasible_plan():
    inst = _path_instance(28)
    s = LBBDSolver(inst, "reference")
    plan = InterdictionPlan([(1, 10)])
    dyn = evaluate(inst, plan)
    theta = {n: float(n in dyn.unprotected) for n in s.master.tracked}
    assert s.generate(plan, theta) == []
    assert s.best_value == objective(dyn).value


def test_callback_counts_cuts():
    # star: 0 -> 1,2,3 ; node 4 placed too late
    arcs = ((0, 1, 2), (0, 2, 2), (0, 3, 2), (0, 4, 1))
    inst = Instance(Network(5, arcs), {0}, 20, 50, [10], {10: 1})
    s = LBBDSolver(inst, "reference")
    plan = InterdictionPlan([(4, 10)])
    theta = {n: 0.0 for n in s.master.tracked}
    theta[0] = theta[4] = 1.0
    cuts = s.generate(plan, theta)
    assert [c.kind for c in cuts].count("feasibility") == 1
    assert [c.kind for c in cuts].count("optimality") == 3


def test_zero_capacity_converges_immediately():
    red, _ = preprocess(preset("small:0", 1))
    inst = red.with_capacity({t: 0 for t in red.periods})
    for mode in ("iterative", "branch_and_check"):
        rep = solve_lbbd(inst, mode)
        assert rep.status == "optimal"
        assert rep.objective == len(evaluate(inst, InterdictionPlan()).unprotected)
        assert rep.stats.optimality_count == rep.stats.feasibility_count == 0


def _all_cuts(inst):
    out = []
    for mode in ("iterative", "branch_and_check"):
        for window in ("unit", "wide"):
            rep = solve_lbbd(inst, mode, "highs", window=window)
            out.extend(rep.cuts)
    return out


def check_cut(inst, cut: BendersCut, feasible_plans) -> None:
    origin = InterdictionPlan(cut.origin)
    if cut.kind == "optimality":
        assert cut.bound(origin) == 1, cut.to_line()
        for plan, dyn in feasible_plans:
            theta = int(cut.target in dyn.unprotected)
            assert theta >= cut.bound(plan), (cut.to_line(), sorted(plan.placements))
    else:
        assert not cut.satisfied(origin)
        for plan, _ in feasible_plans:
            assert cut.satisfied(plan), (cut.to_line(), sorted(plan.placements))


def feasible_plans(inst):
    out = []
    for plan in enumerate_plans(inst):
        dyn = evaluate(inst, plan)
        if not dyn.violations:
            out.append((plan, dyn))
    return out


@settings(max_examples=60, deadline=None)
@given(tiny_instances())
def test_cuts_valid_and_tight(inst):
    plans = feasible_plans(inst)
    for cut in _all_cuts(inst):
        check_cut(inst, cut, plans)


@settings(max_examples=60, deadline=None)
@given(tiny_instances())
def test_oracle_equivalence(inst):
    _, best = brute_force(inst)
    for backend in ("reference", "highs"):
        for mode in ("iterative", "branch_and_check"):
            rep = solve_lbbd(inst, mode, backend)
            assert rep.status == "optimal" and rep.objective == best
            assert rep.bound == best
            assert objective(evaluate(inst, rep.plan)).value == best


@settings(max_examples=40, deadline=None)
@given(tiny_instances())
def test_lower_bound_monotone(inst):
    rep = solve_lbbd(inst, "iterative", "reference")
    h = rep.bound_history
    assert all(b >= a - 1e-9 for a, b in zip(h, h[1:]))


def test_warm_start_never_changes_optimum():
    rng = random.Random(17)
    for _ in range(25):
        inst = random_tiny(rng)
        _, best = brute_force(inst)
        plans = [p for p, _ in feasible_plans(inst)]
        for plan in rng.sample(plans, min(3, len(plans))):
            for mode in ("iterative", "branch_and_check"):
                assert solve_lbbd(inst, mode, warm_start=plan).objective == best


def test_greedy_bounds():
    rng = random.Random(23)
    for _ in range(40):
        inst = random_tiny(rng)
        _, best = brute_force(inst)
        g = greedy(inst)
        assert g.objective >= best
        assert objective(evaluate(inst, g.plan)).feasible
        if len(inst.periods) == 1:
            assert g.objective == best


def test_greedy_on_small_preset():
    red, _ = preprocess(preset("small:2", 1))
    g = greedy(red)
    ex = solve_lbbd(red, "branch_and_check", warm_start=g.plan)
    assert ex.status == "optimal" and ex.objective <= g.objective


def test_small_preset_modes_agree():
    red, _ = preprocess(preset("small:3", 1))
    a = solve_lbbd(red, "iterative")
    b = solve_lbbd(red, "branch_and_check")
    assert a.status == b.status == "optimal" and a.objective == b.objective


def test_time_limit_returns_valid_bound():
    red, _ = preprocess(preset("large:L1B", 1))
    rep = solve_lbbd(red, "branch_and_check", time_limit=3)
    assert rep.plan is not None and objective(evaluate(red, rep.plan)).value == rep.objective
    assert rep.bound is not None and rep.bound <= rep.objective


def test_cut_pool_roundtrip(tmp_path):
    red, _ = preprocess(preset("small:4", 1))
    rep = solve_lbbd(red, "iterative")
    path = tmp_path / "cuts.txt"
    write_cut_pool(rep.cuts, path)
    back = read_cut_pool(path)
    assert [c.key() for c in back] == [c.key() for c in rep.cuts]
    assert len(path.read_text().splitlines()) == len(rep.cuts)


def test_bad_mode_and_window():
    inst = _path_instance(28)
    with pytest.raises(ValueError):
        solve_lbbd(inst, "sideways")
    with pytest.raises(ValueError):
        solve_lbbd(inst, window="narrow")

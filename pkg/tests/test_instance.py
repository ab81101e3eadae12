from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from firelbbd import instance as io
from firelbbd.firedyn import brute_force
from firelbbd.instance import (
    GridSpec,
    InstanceError,
    SplitMix64,
    generate_grid,
    generate_large,
    large_spec,
    preprocess,
    preset,
    small_spec,
)

from conftest import chain, random_tiny, tiny_instances


def test_splitmix_reference_values():
    # first outputs for seed 0 of the published splitmix64 generator
    rng = SplitMix64(0)
    assert [rng.next() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F,
    ]


def test_small_row0_counts():
    inst = generate_grid(small_spec(0, 1))
    assert inst.n == 100
    assert inst.network.arc_count == 360
    assert inst.psi == 28 and inst.delta == 50
    assert inst.periods == (10, 15) and inst.capacity == {10: 3, 15: 3}
    assert inst.ignitions == {55}


def test_one_by_two_grid():
    spec = GridSpec(1, 2, (0, 0), (7, 9), (2, 4), (4, 6), (6, 8), seed=3)
    inst = generate_grid(spec)
    assert inst.n == 2 and inst.network.arc_count == 2
    assert 4 <= inst.network.weight(0, 1) <= 6  # east
    assert 6 <= inst.network.weight(1, 0) <= 8  # west


def test_direction_bounds_respected():
    spec = small_spec(3, 7)
    inst = generate_grid(spec)
    cols = spec.cols
    for i, j, w in inst.network.arcs:
        if j == i - cols:
            lo, hi = spec.dist_north
        elif j == i + cols:
            lo, hi = spec.dist_south
        elif j == i + 1:
            lo, hi = spec.dist_east
        else:
            lo, hi = spec.dist_west
        assert lo <= w <= hi


def test_generator_is_deterministic():
    assert io.dumps(preset("small:5", 2)) == io.dumps(preset("small:5", 2))
    assert io.dumps(preset("small:5", 2)) != io.dumps(preset("small:5", 3))


def test_draw_order_first_node():
    spec = GridSpec(2, 2, (0, 0), (1, 100), (1, 100), (1, 100), (1, 100), seed=11)
    rng = SplitMix64(11)
    # node 0 has a south then an east neighbour
    south = rng.uniform_int(1, 100)
    east = rng.uniform_int(1, 100)
    inst = generate_grid(spec)
    assert inst.network.weight(0, 2) == south
    assert inst.network.weight(0, 1) == east


@pytest.mark.parametrize("kind,total,delta,nper", [("A", 12, 50, 4), ("B", 18, 30, 6)])
def test_large_types(kind, total, delta, nper):
    inst = generate_large(large_spec(0, kind, 1), kind)
    assert inst.total_capacity() == total
    assert inst.delta == delta and inst.psi == 70 and len(inst.periods) == nper
    assert inst.n == 400 and inst.ignitions == {210}


def test_large_bad_type():
    with pytest.raises(InstanceError):
        large_spec(0, "C", 1)


def test_preset_names():
    assert preset("large:L0B", 0).delta == 30
    for bad in ("small:24", "large:L8A", "medium:1"):
        with pytest.raises(InstanceError):
            preset(bad)


def test_roundtrip_bytes(tmp_path):
    inst = preset("small:9", 4)
    p = tmp_path / "i.json"
    io.save(inst, p)
    again = io.load(p)
    assert again == inst
    assert io.dumps(again) == p.read_text()
    assert p.read_text().endswith("\n")


@settings(max_examples=60, deadline=None)
@given(tiny_instances())
def test_roundtrip_random(inst):
    assert io.loads(io.dumps(inst)) == inst


def test_rational_roundtrip():
    from fractions import Fraction
    inst = chain([Fraction(5, 2), 3], 10, Fraction(7, 3), [Fraction(1, 2)], {Fraction(1, 2): 1})
    text = io.dumps(inst)
    assert '"5/2"' in text
    assert io.loads(text) == inst


def _doc():
    return json.loads(io.dumps(chain([3, 4], 10, 5, [2], {2: 1})))


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d.__setitem__("periods", [12]) or d.__setitem__("capacity", [[12, 1]]), "periods[0]"),
    (lambda d: d["arcs"][1].__setitem__(2, 0), "arcs[1][2]"),
    (lambda d: d["arcs"][0].__setitem__(1, 9), "arcs[0][1]"),
    (lambda d: d.pop("psi"), "psi"),
    (lambda d: d.__setitem__("ignitions", []), "ignitions"),
    (lambda d: d.__setitem__("extra", 1), "extra"),
    (lambda d: d.__setitem__("capacity", [[3, 1]]), "capacity"),
])
def test_schema_errors_name_the_field(mutate, path):
    d = _doc()
    mutate(d)
    with pytest.raises(InstanceError) as exc:
        io.from_dict(d)
    assert exc.value.path == path


def test_preprocess_nothing_removed():
    inst = chain([1, 1], 10, 5, [1], {1: 1})
    out, rep = preprocess(inst)
    assert rep.removed == frozenset() and out.n == 3


def test_preprocess_only_ignition_kept():
    inst = chain([20, 5], 10, 5, [1], {1: 1})
    out, rep = preprocess(inst)
    assert rep.kept == {0} and out.n == 1 and out.network.arc_count == 0


def test_preprocess_report_partition():
    inst = preset("small:0", 1)
    out, rep = preprocess(inst)
    assert rep.kept | rep.removed == set(range(inst.n))
    assert not rep.kept & rep.removed
    assert rep.removed == {n for n in range(inst.n) if rep.base_arrivals[n] >= inst.psi}
    assert out.n == len(rep.kept)


def test_preprocess_safety_random():
    rng = random.Random(2024)
    checked = 0
    for _ in range(120):
        inst = random_tiny(rng)
        red, rep = preprocess(inst)
        assert brute_force(inst)[1] == brute_force(red)[1]
        checked += bool(rep.removed)
    assert checked > 10

from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import strategies as st

from firelbbd.instance import Instance
from firelbbd.milp import ExternalConfig, find_cbc
from firelbbd.netgraph import Network


def random_network(rng: random.Random, n: int, density: float = 0.35, wmax: int = 12) -> Network:
    arcs = []
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < density:
                arcs.append((i, j, rng.randint(1, wmax)))
    return Network(n, tuple(arcs))


def random_tiny(rng: random.Random, max_nodes: int = 9, max_resources: int = 2) -> Instance:
    """Instance with at most 9 nodes, 2 periods and 2 resources in total."""
    n = rng.randint(2, max_nodes)
    net = random_network(rng, n, density=rng.choice((0.2, 0.35, 0.5)))
    ign = rng.sample(range(n), 1 if rng.random() < 0.8 else 2)
    psi = rng.randint(4, 30)
    periods = sorted(rng.sample(range(psi), rng.randint(1, min(2, psi))))
    cap = {t: rng.randint(0, max_resources) for t in periods}
    while sum(cap.values()) > max_resources:
        t = rng.choice([t for t in periods if cap[t] > 0])
        cap[t] -= 1
    return Instance(net, ign, psi, rng.randint(1, 20), periods, cap, id=f"tiny-{rng.random():.6f}")


@st.composite
def tiny_instances(draw, max_nodes: int = 7):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_tiny(random.Random(seed), max_nodes=max_nodes)


@st.composite
def networks(draw, max_nodes: int = 12):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = random.Random(seed)
    return random_network(rng, rng.randint(1, max_nodes), density=rng.choice((0.15, 0.3, 0.6)))


def chain(weights, psi, delta, periods, capacity) -> Instance:
    """0 -> 1 -> ... path with the given arc weights, ignition at 0."""
    arcs = tuple((k, k + 1, w) for k, w in enumerate(weights))
    return Instance(Network(len(weights) + 1, arcs), {0}, psi, delta, periods, capacity, id="chain")


@pytest.fixture(scope="session")
def cbc_config():
    exe = find_cbc()
    if exe is None:
        return None
    return replace(ExternalConfig.preset("cbc"), executable=exe)


# one line per acceptance criterion, filled by test_acceptance and echoed at the end of the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])

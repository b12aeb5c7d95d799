import random

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from zext import _accel
from zext.graph import MultiGraph
from zext.instance import Instance
from zext.metric import CostMatrix, MetricTree

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow,
                                                 HealthCheck.function_scoped_fixture])
settings.load_profile("default")

LETTERS = "abcdefgh"


def rand_metric(labels, rng: random.Random, wmax: int = 4) -> CostMatrix:
    """Shortest-path closure of random positive weights."""
    s = len(labels)
    w = np.zeros((s, s), dtype=np.int64)
    for i in range(s):
        for j in range(i + 1, s):
            w[i, j] = w[j, i] = rng.randint(1, wmax)
    for k in range(s):
        w = np.minimum(w, w[:, [k]] + w[[k], :])
    return CostMatrix(tuple(labels), w)


def rand_cost(labels, rng: random.Random, wmax: int = 5) -> CostMatrix:
    s = len(labels)
    w = np.zeros((s, s), dtype=np.int64)
    for i in range(s):
        for j in range(i + 1, s):
            w[i, j] = w[j, i] = rng.randint(0, wmax)
    return CostMatrix(tuple(labels), w)


def rand_edges(n: int, m: int, rng: random.Random, connected: bool = False):
    edges = [(rng.randrange(i), i) for i in range(1, n)] if connected else []
    while len(edges) < m:
        u, v = rng.sample(range(n), 2)
        edges.append((u, v))
    return edges


def rand_tree(nodes: int, rng: random.Random, prefix: str = "n") -> MetricTree:
    names = tuple(f"{prefix}{i}" for i in range(nodes))
    edges = tuple((rng.randrange(i), i) for i in range(1, nodes))
    return MetricTree(names, edges, names)


def with_labels(tree: MetricTree, labels) -> MetricTree:
    return MetricTree(tree.nodes, tree.edges, tuple(labels))


def rand_metric_instance(rng: random.Random, nmax=8, mmax=14, lmax=4) -> Instance:
    n = rng.randint(2, nmax)
    L = rng.randint(2, lmax)
    labels = LETTERS[:L]
    edges = rand_edges(n, rng.randint(1, mmax), rng)
    term = {v: rng.choice(labels) for v in rng.sample(range(n), rng.randint(1, min(n, 4)))}
    return Instance(MultiGraph(n, edges, term), rand_metric(labels, rng))


def rand_tree_instance(rng: random.Random, leaf: bool, nmax=6, tmax=6, unary=False) -> Instance:
    """Random graph over a random tree; labels are the leaves or a random node subset."""
    while True:
        tree = rand_tree(rng.randint(3, tmax), rng)
        if leaf:
            dom = tree.leaves
        else:
            dom = tuple(sorted(rng.sample(tree.nodes, rng.randint(2, min(4, len(tree.nodes))))))
        if len(dom) >= 2:
            break
    tree = with_labels(tree, dom)
    n = rng.randint(2, nmax)
    edges = rand_edges(n, rng.randint(n - 1, n + 3), rng, connected=True)
    nt = rng.randint(0 if unary else 1, min(n, 3))
    term = {v: rng.choice(dom) for v in rng.sample(range(n), nt)}
    return Instance(MultiGraph(n, edges, term), tree)


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture(params=["numba", "numpy"])
def accel_mode(request, monkeypatch):
    if request.param == "numba" and not _accel.HAVE_NUMBA:
        pytest.skip("numba not installed")
    monkeypatch.setattr(_accel, "USE_NUMBA", request.param == "numba")
    return request.param


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; fails the test when the criterion does not hold."""
    seen = []

    def record(num: int, ok: bool, detail: str):
        seen.append(num)
        ACCEPTANCE[num] = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        assert ok, ACCEPTANCE[num]

    yield record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])

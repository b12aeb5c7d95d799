"""Numeric kernels, run once under numba and once under the numpy fallback."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zext import kernels
from zext.kernels import DEFAULT_PRIME as P

SMALL_P = 101


def exact_rank(rows) -> int:
    """Rank over the rationals by fraction elimination."""
    a = [[Fraction(int(x)) for x in r] for r in rows]
    rank = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(len(a)):
            if i != rank and a[i][c] != 0:
                f = a[i][c] / a[rank][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def brute_labelling(fixed, free, L, dist, eu, ev, unary, kmax):
    best = None
    for lab in itertools.product(range(L), repeat=len(free)):
        full = list(fixed)
        for v, l in zip(free, lab):
            full[v] = l
        cross = sum(full[a] != full[b] for a, b in zip(eu, ev))
        if kmax >= 0 and cross > kmax:
            continue
        cost = sum(dist[full[a], full[b]] for a, b in zip(eu, ev))
        cost += sum(unary[v, full[v]] for v in range(len(full)))
        if best is None or cost < best[0]:
            best = (cost, cross, full)
    return best


@st.composite
def labelling_problems(draw):
    n = draw(st.integers(1, 6))
    L = draw(st.integers(1, 3))
    fixed = [draw(st.sampled_from([-1] + list(range(L)))) for _ in range(n)]
    free = [i for i, f in enumerate(fixed) if f < 0]
    m = draw(st.integers(0, 8))
    eu = [draw(st.integers(0, n - 1)) for _ in range(m)]
    ev = [draw(st.integers(0, n - 1)) for _ in range(m)]
    d = np.array([[0 if i == j else draw(st.integers(0, 4)) for j in range(L)] for i in range(L)])
    d = np.minimum(d, d.T)
    unary = np.array([[draw(st.integers(0, 3)) for _ in range(L)] for _ in range(n)])
    kmax = draw(st.integers(-1, 4))
    return fixed, free, L, d, eu, ev, unary, kmax


@given(labelling_problems())
def test_best_labelling_matches_enumeration(accel_mode, prob):
    fixed, free, L, d, eu, ev, unary, kmax = prob
    cost, cross, lab = kernels.best_labelling(np.array(fixed), np.array(free, dtype=np.int64), L, d,
                                              np.array(eu, dtype=np.int64),
                                              np.array(ev, dtype=np.int64), unary, kmax)
    want = brute_labelling(fixed, free, L, d, eu, ev, unary, kmax)
    if want is None:
        assert cost == -1
        return
    # first optimum in enumeration order
    assert (cost, cross, list(lab)) == (want[0], want[1], want[2])


@given(labelling_problems())
def test_all_costs_agree_with_best(accel_mode, prob):
    fixed, free, L, d, eu, ev, unary, _ = prob
    args = (np.array(fixed), np.array(free, dtype=np.int64), L, d, np.array(eu, dtype=np.int64),
            np.array(ev, dtype=np.int64), unary)
    costs, crosses = kernels.all_labelling_costs(*args)
    assert len(costs) == L ** len(free)
    cost, cross, lab = kernels.best_labelling(*args)
    i = int(np.argmin(costs))
    assert costs[i] == cost
    assert list(kernels.decode_labelling(i, fixed, free, L)) == list(lab)


def test_paths_agree_on_larger_block(monkeypatch):
    rng = np.random.default_rng(0)
    n, L = 9, 3
    fixed = np.full(n, -1)
    fixed[0], fixed[1] = 0, 2
    free = np.arange(2, n)
    eu = rng.integers(0, n, 16)
    ev = rng.integers(0, n, 16)
    d = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    out = {}
    for flag in (True, False):
        monkeypatch.setattr(kernels._accel, "USE_NUMBA", flag)
        c, x, lab = kernels.best_labelling(fixed, free, L, d, eu, ev, None, 3)
        out[flag] = (c, x, tuple(lab))
    assert out[True] == out[False]


class TestSeparation:
    def test_bridge(self, accel_mode):
        edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]
        eu, ev = zip(*edges)
        mask = kernels.best_separation(6, eu, ev, 2, 1)
        assert mask == 0b000111

    def test_none(self, accel_mode):
        edges = list(itertools.combinations(range(6), 2))
        eu, ev = zip(*edges)
        assert kernels.best_separation(6, eu, ev, 2, 2) == -1

    @given(st.integers(4, 9), st.data())
    def test_paths_agree(self, n, data):
        m = data.draw(st.integers(n - 1, 2 * n))
        edges = [(i - 1, i) for i in range(1, n)]
        edges += [tuple(data.draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2)))
                  for _ in range(m - n + 1)]
        eu, ev = zip(*edges)
        sigma, k = data.draw(st.integers(0, 3)), data.draw(st.integers(0, 3))
        old = kernels._accel.USE_NUMBA
        try:
            res = []
            for flag in (True, False):
                kernels._accel.USE_NUMBA = flag
                res.append(kernels.best_separation(n, eu, ev, sigma, k))
        finally:
            kernels._accel.USE_NUMBA = old
        assert res[0] == res[1]


matrices = st.integers(1, 5).flatmap(lambda r: st.integers(1, 6).flatmap(
    lambda c: st.lists(st.lists(st.integers(-3, 3), min_size=c, max_size=c), min_size=r, max_size=r)))


class TestFieldAlgebra:
    def test_identity_full_rank(self, accel_mode):
        assert kernels.rank_mod(np.eye(4, dtype=np.int64)) == 4

    def test_duplicate_column(self, accel_mode):
        c = np.array([[1], [2], [3]])
        assert kernels.rank_mod(np.hstack([c, c])) == 1

    @given(matrices)
    def test_rank_matches_rationals(self, accel_mode, rows):
        assert kernels.rank_mod(np.array(rows)) == exact_rank(rows)

    def test_random_5x8(self, accel_mode):
        a = np.random.default_rng(5).integers(-9, 10, size=(5, 8))
        assert kernels.rank_mod(a) == exact_rank(a.tolist())

    @given(matrices)
    def test_nullspace(self, accel_mode, rows):
        a = np.array(rows)
        ns = kernels.nullspace_mod(a, SMALL_P)
        assert ns.shape[0] == a.shape[1] - kernels.rank_mod(a, SMALL_P)
        assert not np.any((a % SMALL_P) @ ns.T % SMALL_P)

    @given(matrices)
    def test_rref_pivots(self, accel_mode, rows):
        a = np.array(rows)
        r, piv = kernels.rref_mod(a, SMALL_P)
        assert len(piv) == kernels.rank_mod(a, SMALL_P)
        for i, c in enumerate(piv):
            assert r[i, c] == 1 and np.count_nonzero(r[:, c]) == 1

    def test_solve(self, accel_mode):
        a = np.array([[2, 1], [1, 3]])
        x = kernels.solve_mod(a, np.array([[1], [0]]))
        assert np.array_equal(a @ x % P, np.array([[1], [0]]))
        assert kernels.solve_mod(np.array([[1, 2], [2, 4]]), np.eye(2, dtype=np.int64)) is None

    def test_no_overflow_near_prime(self, accel_mode):
        a = np.array([[P - 1, P - 2], [P - 3, P - 1]])
        # det = (p-1)^2 - (p-2)(p-3) = 1 - 6 = -5 mod p, nonzero
        assert kernels.rank_mod(a) == 2

    def test_wedge_vector_is_minors(self, accel_mode):
        cols = np.array([[1, 0], [2, 1], [0, 3]])
        w = kernels.wedge_vector(cols, SMALL_P)
        assert list(w) == [1, 3, 6]

    @given(st.lists(st.lists(st.integers(0, 4), min_size=3, max_size=3), min_size=1, max_size=6))
    def test_greedy_keeps_a_basis(self, accel_mode, rows):
        v = np.array(rows)
        keep = kernels.greedy_independent(v, SMALL_P)
        assert kernels.rank_mod(v[keep], SMALL_P) == keep.sum() == kernels.rank_mod(v, SMALL_P)
        # greedy order: a dropped row depends on the rows kept before it
        for i in np.nonzero(~keep)[0]:
            earlier = v[:i][keep[:i]]
            assert kernels.rank_mod(np.vstack([earlier, v[i]]), SMALL_P) == len(earlier)


def test_benchmark_paths_agree(capsys):
    import runpy
    from pathlib import Path

    bench = runpy.run_path(str(Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"))
    assert bench["main"](["--repeat", "1"]) == 0
    assert "greedy_independent" in capsys.readouterr().out

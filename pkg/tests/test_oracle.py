import itertools
import random

import pytest

from zext.fixtures import PATH_TREE, STAR_TREE, path_b, star_a, triangle_c
from zext.graph import MultiGraph
from zext.instance import INF, Instance, evaluate
from zext.metric import MetricTree
from zext.oracle import OracleRefused, all_optima, brute_k_bounded, brute_solve, projections

from conftest import rand_metric_instance, rand_tree_instance


def naive(inst, domain, kmax=None):
    """Straight itertools enumeration, independent of the kernels."""
    g = inst.graph
    free = [v for v in g.vertices() if v not in g.terminals]
    best = INF
    for lab in itertools.product(domain, repeat=len(free)):
        full = dict(g.terminals) | dict(zip(free, lab))
        cross = sum(full[a] != full[b] for _, a, b in g.edges())
        if kmax is not None and cross > kmax:
            continue
        cost = sum(inst.mu(full[a], full[b]) if a in full else 0 for _, a, b in g.edges())
        if best is INF or cost < best:
            best = cost
    return best


class TestBrute:
    def test_triangle(self):
        sol = brute_solve(triangle_c())
        assert (sol.cost, sol.crossings) == (6, 3)

    def test_star_integral(self):
        assert brute_solve(star_a()).cost == 4

    def test_star_relaxed(self):
        sol = brute_solve(star_a(), domain=STAR_TREE.nodes)
        assert sol.cost == 3 and sol.labelling[3] == "c"

    def test_lexicographic_tie_break(self):
        # the centre can take x, y or z at cost 4; the first label wins
        assert brute_solve(star_a()).labelling[3] == "x"

    def test_cap_refused(self):
        with pytest.raises(OracleRefused):
            brute_solve(star_a(), cap=2)

    def test_solution_is_consistent(self):
        inst = star_a()
        sol = brute_solve(inst)
        cost, cross = evaluate(inst, sol.labelling)
        assert cost == sol.cost and cross == sol.crossing

    def test_matches_naive(self):
        rng = random.Random(7)
        for _ in range(40):
            inst = rand_metric_instance(rng, nmax=6, mmax=9, lmax=3)
            k = rng.randint(0, 4)
            assert brute_k_bounded(inst, k) == naive(inst, inst.labels, k)
            sol = brute_solve(inst)
            assert sol.cost == naive(inst, inst.labels)


class TestKBounded:
    def test_star_k1(self):
        assert brute_k_bounded(star_a(), 1) is INF

    def test_star_k2(self):
        assert brute_k_bounded(star_a(), 2) == 4

    def test_vacuous_budget(self):
        rng = random.Random(2)
        for _ in range(20):
            inst = rand_metric_instance(rng, nmax=6)
            sol = brute_solve(inst)
            assert brute_k_bounded(inst, inst.graph.m) == sol.cost

    def test_monotone_in_k(self):
        rng = random.Random(4)
        for _ in range(20):
            inst = rand_metric_instance(rng, nmax=6)
            vals = [brute_k_bounded(inst, k) for k in range(inst.graph.m + 1)]
            for a, b in zip(vals, vals[1:]):
                # a larger budget never hurts
                assert a is INF or (b is not INF and b <= a)


class TestProjections:
    def test_path_support_is_tree_path(self):
        inst = path_b()
        pr = projections(inst, domain=PATH_TREE.nodes)
        for v in (1, 2):
            D = pr.D[v]
            assert D <= {"x", "c", "y"}
            idx = sorted(PATH_TREE.index[z] for z in D)
            assert idx == list(range(idx[0], idx[-1] + 1))

    def test_star_relaxed_unique(self):
        pr = projections(star_a(), domain=STAR_TREE.nodes)
        assert pr.D[3] == {"c"}
        assert len(pr.optima) == 1

    def test_forced_single_neighbour(self):
        g = MultiGraph(2, [(0, 1)], {0: "x"})
        pr = projections(Instance(g, STAR_TREE), domain=STAR_TREE.nodes)
        assert pr.D[1] == {"x"}

    def test_relations_contain_optima(self):
        inst = path_b()
        pr = projections(inst, domain=PATH_TREE.nodes)
        for lab in pr.optima:
            for u, v in itertools.product(lab, repeat=2):
                assert (lab[u], lab[v]) in pr.R[u, v]

    def test_integral_restriction(self):
        pr = projections(path_b(), domain=PATH_TREE.nodes)
        assert pr.D_I(1) == pr.D[1] & {"x", "y"}

    def test_all_optima_cost(self):
        inst = star_a()
        cost, opts = all_optima(inst)
        assert cost == 4 and len(opts) == 3
        assert all(evaluate(inst, o)[0] == 4 for o in opts)


def majority(ops):
    def m(a, b, c):
        return ops.lcaskew(ops.lcaskew(ops.lca(a, b), ops.lca(a, c)), ops.lca(b, c))
    return m


def test_opt_set_invariants():
    """Majority closure, weak-pair equality and non-shared pairs on relaxed optima."""
    rng = random.Random(11)
    for _ in range(40):
        inst = rand_tree_instance(rng, leaf=rng.random() < 0.5, nmax=6)
        t = inst.tree
        pr = projections(inst, domain=t.nodes)
        idx = t.index
        opt = {tuple(sorted(o.items())) for o in pr.optima}
        for r in range(len(t.nodes)):
            ops = t.rooted(r)
            m = majority(ops)
            for _ in range(3):
                l1, l2, l3 = (rng.choice(pr.optima) for _ in range(3))
                lab = {v: t.nodes[m(idx[l1[v]], idx[l2[v]], idx[l3[v]])] for v in l1}
                assert tuple(sorted(lab.items())) in opt
            d = t.dist
            for l1, l2 in itertools.product(pr.optima[:4], repeat=2):
                for _, u, v in inst.graph.edges():
                    a, b, x, y = idx[l1[u]], idx[l1[v]], idx[l2[u]], idx[l2[v]]
                    assert d[a, b] + d[x, y] == (d[ops.lca(a, x), ops.lca(b, y)]
                                                 + d[ops.lcaskew(a, x), ops.lcaskew(b, y)])
        for (u, v), rel in pr.R.items():
            for a in pr.D[u]:
                for b in pr.D[v]:
                    if (a, b) not in rel:
                        shared = pr.D[u] & pr.D[v]
                        assert a in shared and b in shared and a != b

import itertools
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zext.metric import (CostError, CostMatrix, MetricTree, NoExtension, ReconstructionError,
                         check_interpolation, check_multimorphism, equality_support, extend_unary,
                         four_point_witness, reconstruct_tree, strong_identity_holds,
                         triangle_witness, validate_cost)

from conftest import rand_tree, with_labels


def path_tree(names):
    return MetricTree.from_names(names, list(zip(names, names[1:])))


def uniform(labels, c=2):
    s = len(labels)
    return CostMatrix(tuple(labels), c * (np.ones((s, s), dtype=np.int64) - np.eye(s, dtype=np.int64)))


@st.composite
def trees(draw, lo=1, hi=8):
    n = draw(st.integers(lo, hi))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, n)]
    names = tuple(f"n{i}" for i in range(n))
    return MetricTree(names, tuple((p, i) for i, p in enumerate(parents, 1)), names)


class TestValidate:
    def test_uniform_is_tree_metric(self):
        assert validate_cost(uniform("xyz")).kind == "tree-metric"

    def test_triangle_violation(self):
        m = CostMatrix(("a", "b", "c"), np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]]))
        c = validate_cost(m)
        assert c.kind == "simple-cost" and c.witness == ("a", "b", "c")
        assert triangle_witness(m) == ("a", "b", "c")

    def test_four_point_violation(self):
        # the 4-cycle metric is not a tree metric
        a = np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]])
        m = CostMatrix(tuple("abcd"), a)
        c = validate_cost(m)
        assert c.kind == "metric" and c.witness == ("a", "b", "c", "d")
        i = [m.index[x] for x in c.witness]
        sums = sorted((a[i[0], i[1]] + a[i[2], i[3]], a[i[0], i[2]] + a[i[1], i[3]],
                       a[i[0], i[3]] + a[i[1], i[2]]))
        assert sums[2] != sums[1]

    @pytest.mark.parametrize("a, witness", [
        ([[0, -1], [-1, 0]], ("a", "b")),
        ([[1, 0], [0, 0]], ("a", "a")),
        ([[0, 1], [2, 0]], ("a", "b")),
    ])
    def test_not_simple(self, a, witness):
        with pytest.raises(CostError) as exc:
            validate_cost(CostMatrix(("a", "b"), np.array(a)))
        assert exc.value.witness == witness

    def test_induced_candidate(self):
        t = with_labels(path_tree(["x", "c", "y"]), ["x", "c", "y"])
        assert validate_cost(t.cost_matrix()).kind == "induced-tree-metric-candidate"

    @given(trees(lo=2))
    def test_leaf_distances_pass_four_point(self, t):
        m = with_labels(t, t.leaves).cost_matrix()
        assert four_point_witness(m) is None
        assert validate_cost(m).kind == "tree-metric"


class TestReconstruct:
    def test_uniform_star(self):
        t = reconstruct_tree(uniform("xyz"))
        assert len(t.nodes) == 4 and set(t.leaves) == {"x", "y", "z"}
        assert t.is_leaf_metric

    def test_two_labels(self):
        t = reconstruct_tree(uniform("xy"))
        assert len(t.nodes) == 3 and t.d("x", "y") == 2 and t.is_leaf_metric

    def test_random_subset(self):
        rng = random.Random(3)
        t = rand_tree(12, rng)
        dom = rng.sample(t.nodes, 5)
        m = with_labels(t, dom).cost_matrix()
        r = reconstruct_tree(m)
        assert np.array_equal(r.cost_matrix().mat, m.mat)

    def test_half_integral_refused(self):
        with pytest.raises(ReconstructionError) as exc:
            reconstruct_tree(uniform("xyz", 1))
        assert exc.value.witness

    def test_non_tree_refused(self):
        a = np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]])
        with pytest.raises(ReconstructionError):
            reconstruct_tree(CostMatrix(tuple("abcd"), a))

    @given(trees(lo=2, hi=15), st.data())
    def test_round_trip(self, t, data):
        leafy = data.draw(st.booleans())
        if leafy:
            dom = t.leaves
        else:
            dom = data.draw(st.lists(st.sampled_from(t.nodes), min_size=1, unique=True))
        m = with_labels(t, dom).cost_matrix()
        r = reconstruct_tree(m)
        assert np.array_equal(r.cost_matrix().mat, m.mat)
        if leafy and len(dom) >= 2:
            assert r.is_leaf_metric


class TestOperators:
    def test_midpoints_even(self):
        ops = path_tree(list("abcd")).rooted("a")
        assert ops.midup(0, 3) == 1 and ops.middown(0, 3) == 2
        assert ops.midup(3, 0) == 1 and ops.middown(3, 0) == 2

    def test_midpoints_odd(self):
        ops = path_tree(list("abc")).rooted("a")
        assert ops.midup(0, 2) == ops.middown(0, 2) == 1

    def test_lca_on_path(self):
        ops = path_tree(["r", "a", "b"]).rooted("r")
        assert ops.lca(1, 2) == 1
        assert ops.lcaskew(1, 2) == 2

    def test_siblings(self):
        t = MetricTree.from_names(["r", "x", "y"], [("r", "x"), ("r", "y")])
        ops = t.rooted("r")
        assert ops.lca(1, 2) == 0
        # walk d(y, r) = 1 step from x toward y: that is r
        assert ops.lcaskew(1, 2) == 0

    @given(trees(), st.data())
    def test_outputs_on_path(self, t, data):
        n = len(t.nodes)
        r, x, y = (data.draw(st.integers(0, n - 1)) for _ in range(3))
        ops = t.rooted(r)
        d = t.dist
        for fn in (ops.midup, ops.middown, ops.lca, ops.lcaskew):
            z = fn(x, y)
            assert d[x, z] + d[z, y] == d[x, y]
        assert ops.midup(x, x) == ops.middown(x, x) == ops.lca(x, x) == ops.lcaskew(x, x) == x
        assert ops.midup(x, y) == ops.midup(y, x) and ops.middown(x, y) == ops.middown(y, x)
        assert ops.lca(x, y) == ops.lca(y, x)
        assert ops.is_ancestor(ops.midup(x, y), ops.middown(x, y))
        assert abs(d[x, ops.midup(x, y)] - d[y, ops.midup(x, y)]) <= 1
        assert d[x, ops.lcaskew(x, y)] == d[y, ops.lca(x, y)]

    def test_lcaskew_symmetric_by_definition(self):
        # walking d(y, lca) from x and d(x, lca) from y reach the same node of P[x, y]
        t = MetricTree.from_names(["r", "x", "x2", "x3", "y"],
                                  [("r", "x"), ("x", "x2"), ("x2", "x3"), ("r", "y")])
        ops = t.rooted("r")
        assert ops.lcaskew(3, 4) == ops.lcaskew(4, 3) == 2


class TestMultimorphism:
    @given(trees(hi=6), st.data())
    def test_distance_strong_and_weak(self, t, data):
        ops = t.rooted(data.draw(st.integers(0, len(t.nodes) - 1)))
        assert check_multimorphism(t.dist, ops, "strong") is None
        assert check_multimorphism(t.dist, ops, "weak") is None

    def test_negated_distance_fails(self):
        t = path_tree(list("abc"))
        w = check_multimorphism(lambda a, b: -int(t.dist[a, b]), t.rooted(0), "strong")
        assert w is not None
        (x1, x2), (y1, y2) = w
        ops = t.rooted(0)
        f = lambda a, b: -int(t.dist[a, b])
        assert f(x1, x2) + f(y1, y2) < f(ops.midup(x1, y1), ops.midup(x2, y2)) + \
            f(ops.middown(x1, y1), ops.middown(x2, y2))

    @given(trees(hi=5), st.data())
    def test_strong_implies_weak_unary(self, t, data):
        n = len(t.nodes)
        vals = data.draw(st.lists(st.integers(0, 4), min_size=n, max_size=n))
        ops = t.rooted(data.draw(st.integers(0, n - 1)))
        f = np.array(vals)
        if check_multimorphism(f, ops, "strong", arity=1) is None:
            assert check_multimorphism(f, ops, "weak", arity=1) is None


class TestEqualitySupport:
    def test_collinear_orders(self):
        t = path_tree(list("pqrs"))
        a, x, b, y = 0, 1, 2, 3
        assert equality_support(t, a, b, x, y)
        a, y, b, x = 0, 1, 2, 3
        assert not equality_support(t, a, b, x, y)
        assert equality_support(t, 2, 2, 2, 2)

    def test_shared_middle_not_preserved(self):
        # a, then b = y, then x on a path: d(a,b) + d(x,y) = 2 but both midpoints meet
        t = path_tree(list("pqr"))
        assert not equality_support(t, 0, 1, 2, 1)
        assert not strong_identity_holds(t, t.rooted(0), 0, 1, 2, 1)

    def test_off_path_quadruple(self):
        t = MetricTree.from_names(list("cxyz"), [("c", "x"), ("c", "y"), ("c", "z")])
        assert not equality_support(t, 1, 2, 3, 1)

    @given(trees(hi=7), st.data())
    def test_matches_direct(self, t, data):
        n = len(t.nodes)
        ops = t.rooted(data.draw(st.integers(0, n - 1)))
        a, b, x, y = (data.draw(st.integers(0, n - 1)) for _ in range(4))
        assert equality_support(t, a, b, x, y) == strong_identity_holds(t, ops, a, b, x, y)


class TestInterpolation:
    def test_zero(self):
        t = path_tree(list("abc"))
        assert check_interpolation([0, 0, 0], t) is None

    def test_leaves_only(self):
        t = MetricTree.from_names(list("cxyz"), [("c", "x"), ("c", "y"), ("c", "z")])
        assert check_interpolation({"c": 0, "x": 7, "y": 1, "z": 3}, t) is None

    def test_bump(self):
        t = path_tree(list("uwv"))
        assert check_interpolation([0, 5, 0], t) == ("u", "v", 1)

    def test_extend_leaf_metric_pads_zero(self):
        t = MetricTree.from_names(list("cxyz"), [("c", "x"), ("c", "y"), ("c", "z")], list("xyz"))
        assert extend_unary({"x": 4, "y": 0, "z": 2}, t) == {"c": 0, "x": 4, "y": 0, "z": 2}

    def test_extend_full_domain_unchanged(self):
        t = path_tree(list("abc"))
        f0 = {"a": 4, "b": 2, "c": 0}
        assert extend_unary(f0, t) == f0

    def test_extend_full_domain_violating(self):
        t = path_tree(list("abc"))
        with pytest.raises(NoExtension) as exc:
            extend_unary({"a": 0, "b": 5, "c": 0}, t)
        assert exc.value.witness == ("a", "c", 1)

    @given(trees(lo=2, hi=7), st.data())
    def test_extension_is_valid_or_refused(self, t, data):
        dom = data.draw(st.lists(st.sampled_from(t.nodes), min_size=1, unique=True))
        tt = with_labels(t, dom)
        f0 = {l: data.draw(st.integers(0, 6)) for l in dom}
        try:
            f = extend_unary(f0, tt)
        except NoExtension:
            return
        assert all(f[l] == f0[l] for l in dom)
        assert check_interpolation(f, tt) is None

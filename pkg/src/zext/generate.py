"""Seeded random trees, metrics and instances."""

from __future__ import annotations

import numpy as np

from .graph import MultiGraph
from .instance import INF, Instance
from .metric import CostMatrix, MetricTree, NoExtension, check_interpolation, extend_unary
from .oracle import DEFAULT_CAP, OracleRefused, brute_solve

KINDS = ("tree", "leaf-metric-instance", "tree-metric-instance", "matrix-metric-instance",
         "cost-instance", "ml-instance")
MAX_N = 30
BRUTE_CAP = 200_000


class GenerateError(ValueError):
    pass


def random_tree(nodes: int, rng: np.random.Generator, prefix: str = "n") -> MetricTree:
    """Uniform-attachment tree; node i > 0 hangs off a random earlier node."""
    if nodes < 1:
        raise GenerateError("a tree needs at least one node")
    names = tuple(f"{prefix}{i}" for i in range(nodes))
    edges = tuple((int(rng.integers(i)), i) for i in range(1, nodes))
    return MetricTree(names, edges, names)


def random_metric(labels: int, rng: np.random.Generator, wmax: int = 5) -> CostMatrix:
    """Shortest-path closure of random positive weights."""
    w = rng.integers(1, wmax + 1, size=(labels, labels))
    w = np.minimum(w, w.T)
    np.fill_diagonal(w, 0)
    for k in range(labels):
        w = np.minimum(w, w[:, [k]] + w[[k], :])
    return CostMatrix(tuple(f"l{i}" for i in range(labels)), w.astype(np.int64))


def random_cost(labels: int, rng: np.random.Generator, wmax: int = 6) -> CostMatrix:
    w = rng.integers(0, wmax + 1, size=(labels, labels))
    w = np.triu(w, 1)
    return CostMatrix(tuple(f"l{i}" for i in range(labels)), (w + w.T).astype(np.int64))


def random_graph(n: int, m: int, labels, rng: np.random.Generator, terminals: int | None = None
                 ) -> MultiGraph:
    """Random spanning tree plus extra random edges; each label gets one terminal first."""
    edges = [(int(rng.integers(i)), i) for i in range(1, n)]
    while len(edges) < m:
        a, b = rng.integers(n, size=2)
        if a != b:
            edges.append((int(a), int(b)))
    labels = list(labels)
    t = min(n, len(labels) if terminals is None else terminals)
    verts = [int(v) for v in rng.permutation(n)[:t]]
    term = {}
    for i, v in enumerate(verts):
        term[v] = labels[i] if i < len(labels) else labels[int(rng.integers(len(labels)))]
    return MultiGraph(n, edges, term)


def _expected(inst: Instance, k: int | None) -> dict:
    out: dict = {"source": "derived"}
    try:
        sol = brute_solve(inst, cap=BRUTE_CAP)
    except OracleRefused:
        return {}
    out["optimum"] = "inf" if sol is INF else sol.cost
    if sol is not INF:
        out["crossings"] = sol.crossings
    if k is not None:
        kb = brute_solve(inst, kmax=k, cap=BRUTE_CAP)
        out["k_bounded"] = "inf" if kb is INF else kb.cost
    if inst.is_tree:
        full = MetricTree(inst.tree.nodes, inst.tree.edges, inst.tree.nodes)
        try:
            rel = brute_solve(Instance(inst.graph, full, unary=inst.unary_extended() or None),
                              cap=BRUTE_CAP)
            out["relaxed"] = rel.cost
        except (OracleRefused, NoExtension):
            pass
    return out


def _budget(exp: dict, rng: np.random.Generator):
    opt = exp.get("optimum")
    if not isinstance(opt, int):
        return None
    return max(0, opt + int(rng.integers(-1, 2)))


def generate(kind: str, seed: int = 0, n: int = 6, m: int | None = None, labels: int = 3,
             tree_nodes: int | None = None, k: int | None = None) -> Instance | MetricTree:
    """Random object of the given kind; the same arguments give the same result."""
    if kind not in KINDS:
        raise GenerateError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if not 1 <= n <= MAX_N:
        raise GenerateError(f"n must be in 1..{MAX_N}")
    rng = np.random.default_rng(seed)
    if kind == "tree":
        return random_tree(tree_nodes or n, rng)
    m = n + n // 2 if m is None else m
    if m < n - 1:
        raise GenerateError("m must be at least n - 1 for a connected graph")
    if kind in ("matrix-metric-instance", "cost-instance"):
        if labels < 1:
            raise GenerateError("need at least one label")
        cost = random_metric(labels, rng) if kind == "matrix-metric-instance" else random_cost(labels, rng)
        g = random_graph(n, m, cost.labels, rng)
        k = int(rng.integers(1, 4)) if k is None else k
        inst = Instance(g, cost, k=k, name=f"{kind}-{seed}")
    else:
        inst = _tree_instance(kind, rng, n, m, labels, tree_nodes, seed)
        if k is not None:
            inst.k = k
    exp = _expected(inst, inst.k)
    if exp:
        inst.meta["expected"] = exp
        if inst.is_tree:
            inst.q = _budget(exp, rng)
    inst.meta["generator"] = {"kind": kind, "seed": seed, "n": n, "m": m}
    return inst


def _tree_instance(kind, rng, n, m, labels, tree_nodes, seed) -> Instance:
    for _ in range(100):
        t = tree_nodes or int(rng.integers(3, 7))
        tree = random_tree(t, rng)
        if kind == "leaf-metric-instance" or (kind == "ml-instance" and rng.random() < 0.5):
            dom = tree.leaves
        else:
            size = int(rng.integers(2, min(labels, t) + 1)) if t >= 2 else 1
            dom = tuple(tree.nodes[i] for i in sorted(rng.choice(t, size=size, replace=False)))
        if len(dom) < 2:
            continue
        tree = MetricTree(tree.nodes, tree.edges, dom)
        if kind == "ml-instance":
            g = random_graph(n, m, dom, rng, terminals=int(rng.integers(0, 3)))
            unary = {}
            for v in range(n):
                if rng.random() < 0.7:
                    unary[v] = {l: int(rng.integers(0, 5)) for l in dom}
            try:
                for row in unary.values():
                    ext = extend_unary(row, tree)
                    if check_interpolation(ext, tree) is not None:
                        raise NoExtension("not interpolating")
            except NoExtension:
                continue
            return Instance(g, tree, unary=unary or None, name=f"{kind}-{seed}")
        g = random_graph(n, m, dom, rng)
        return Instance(g, tree, name=f"{kind}-{seed}")
    raise GenerateError("could not draw an instance with interpolating unary costs")

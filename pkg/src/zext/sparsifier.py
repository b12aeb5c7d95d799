"""Metric-independent sparsification of Zero Extension instances.

Edges that can matter for some metric on at most ``s`` labels are found with
representative sets in a layered matroid: ``s`` copies of a gammoid that
measures edge cuts from the terminal edges, plus a uniform matroid of rank
``k``. Every other edge is contracted, one at a time.

Linear algebra is exact over GF(p); randomness only enters the gammoid and
uniform matroid representations.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import kernels
from .graph import MultiGraph
from .instance import Instance, InstanceError, identify_terminals
from .kernels import DEFAULT_PRIME
from .metric import CostMatrix, MetricTree, triangle_witness
from .pushing import reduce_graph

log = logging.getLogger(__name__)


class Rejected(ValueError):
    """The terminals cannot be separated with at most ``k`` edges."""


@dataclass
class PrimeFieldMatrix:
    entries: np.ndarray
    p: int
    labels: tuple

    def __post_init__(self):
        self.entries = np.ascontiguousarray(self.entries, dtype=np.int64) % self.p
        if self.entries.ndim != 2 or self.entries.shape[1] != len(self.labels):
            raise ValueError("one label per column is required")
        self.col = {l: i for i, l in enumerate(self.labels)}

    def columns(self, labels: Iterable[Hashable]) -> np.ndarray:
        return self.entries[:, [self.col[l] for l in labels]]


def field_rank(a: PrimeFieldMatrix, cols: Iterable[Hashable] | None = None) -> int:
    m = a.entries if cols is None else a.columns(cols)
    if m.shape[0] == 0 or m.shape[1] == 0:
        return 0
    return kernels.rank_mod(m, a.p)


# -- gammoids -------------------------------------------------------------------------


@dataclass
class GammoidDigraph:
    """Digraph whose vertex-disjoint linkages measure edge cuts of ``graph``.

    Nodes: ``("v", v, i)`` copies of vertex v, ``("e", e)`` edge
    subdivisions and ``("s", e)`` sink-copies.
    """

    nodes: list
    arcs: list
    graph: MultiGraph
    index: dict = field(init=False)

    def __post_init__(self):
        self.index = {x: i for i, x in enumerate(self.nodes)}

    def in_neighbours(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for a, b in self.arcs:
            out[self.index[b]].append(self.index[a])
        return out


def digraph_for_gammoid(g: MultiGraph, S: Iterable[int] = ()) -> GammoidDigraph:
    """Subdivide edges, split each vertex into degree-many copies, add sink-copies."""
    nodes: list = []
    copies: dict[int, list] = {}
    for v in g.vertices():
        copies[v] = [("v", v, i) for i in range(g.degree(v))]
        nodes += copies[v]
    arcs = []
    for e, a, b in g.edges():
        mid, sink = ("e", e), ("s", e)
        nodes += [mid, sink]
        for x in copies[a] + copies[b]:
            arcs += [(x, mid), (mid, x), (x, sink)]
    return GammoidDigraph(nodes, arcs, g)


def gammoid_rep(dg: GammoidDigraph, sources: Sequence[Hashable], ground: Sequence[Hashable],
                p: int = DEFAULT_PRIME, seed: int = 0) -> PrimeFieldMatrix:
    """Columns independent iff linked from ``sources`` by vertex-disjoint paths.

    The strict gammoid is the dual of the transversal matroid whose sets are
    ``{x} + in-neighbours(x)`` for non-sources x; a random representation of
    that is dualized through its null space.
    """
    rng = np.random.default_rng(seed)
    src = {dg.index[x] for x in sources}
    inn = dg.in_neighbours()
    rest = [i for i in range(len(dg.nodes)) if i not in src]
    t = np.zeros((len(rest), len(dg.nodes)), dtype=np.int64)
    for r, x in enumerate(rest):
        cols = [x] + inn[x]
        t[r, cols] = rng.integers(1, p, size=len(cols))
    dual = kernels.nullspace_mod(t, p)
    return PrimeFieldMatrix(dual[:, [dg.index[x] for x in ground]], p, tuple(ground))


def uniform_rep(ground: Sequence[Hashable], k: int, p: int = DEFAULT_PRIME,
                seed: int = 0) -> PrimeFieldMatrix:
    """Vandermonde rows 0..k-1 at distinct random points: every k columns independent."""
    rng = np.random.default_rng(seed)
    pts: set[int] = set()
    while len(pts) < len(ground):
        pts.add(int(rng.integers(1, p)))
    xs = np.array(sorted(pts), dtype=np.int64)
    rng.shuffle(xs)
    m = np.ones((k, len(ground)), dtype=np.int64)
    for i in range(1, k):
        m[i] = m[i - 1] * xs % p
    return PrimeFieldMatrix(m, p, tuple(ground))


# -- layered matroid ------------------------------------------------------------------


@dataclass
class LayeredMatroid:
    """Block-diagonal union of ``s`` gammoid layers and a uniform layer 0.

    Columns are labelled ``(layer, element)``.
    """

    matrix: PrimeFieldMatrix
    rows: list[range]  # row block per layer, layer 0 last
    s: int
    k: int
    terminal_edges: frozenset

    def layer_rows(self, layer: int) -> range:
        return self.rows[-1] if layer == 0 else self.rows[layer - 1]

    @property
    def rank(self) -> int:
        return sum(len(r) for r in self.rows)


def terminal_edges(g: MultiGraph, S: Iterable[int]) -> frozenset:
    return frozenset(e for t in S for e in g.incident(t))


def build_layered(g: MultiGraph, S: Iterable[int], k: int, s: int, p: int = DEFAULT_PRIME,
                  seed: int = 0) -> LayeredMatroid:
    S = sorted(S)
    if len(S) > 1 and sum(g.degree(t) for t in S) > 2 * k:
        raise Rejected(f"terminal degrees sum to more than 2k = {2 * k}")
    ES = terminal_edges(g, S)
    dg = digraph_for_gammoid(g, S)
    edges = g.edge_ids()
    ground = [("e", e) for e in edges] + [("s", e) for e in edges]
    gam = gammoid_rep(dg, [("e", e) for e in sorted(ES)], ground, p, seed)
    uni = uniform_rep(edges, min(k, len(edges)), p, seed + 1)
    r_g, r_u = gam.entries.shape[0], uni.entries.shape[0]
    n_rows = s * r_g + r_u
    labels = [(i, x) for i in range(1, s + 1) for x in ground] + [(0, e) for e in edges]
    m = np.zeros((n_rows, len(labels)), dtype=np.int64)
    rows = []
    for i in range(s):
        rows.append(range(i * r_g, (i + 1) * r_g))
        m[i * r_g:(i + 1) * r_g, i * len(ground):(i + 1) * len(ground)] = gam.entries
    rows.append(range(s * r_g, n_rows))
    m[s * r_g:, s * len(ground):] = uni.entries
    return LayeredMatroid(PrimeFieldMatrix(m, p, tuple(labels)), rows, s, k, ES)


# -- representative sets -----------------------------------------------------------------


def representative_set(M: PrimeFieldMatrix, family: Sequence[Sequence[Hashable]],
                       combos: np.ndarray | None = None) -> list[int]:
    """Indices of a subfamily that extends every set some member of ``family`` extends.

    Members are compared by wedge vectors (the maximal minors of their column
    block); a maximal independent subfamily is kept in input order. ``combos``
    may restrict the minors to row choices that can be nonzero.
    """
    if not family:
        return []
    size = len(family[0])
    if any(len(Y) != size for Y in family):
        raise ValueError("all members must have the same size")
    keep_idx, vecs, skipped = [], [], []
    for i, Y in enumerate(family):
        cols = M.columns(Y)
        if kernels.rank_mod(cols, M.p) < size:
            skipped.append(i)
            continue
        vecs.append(kernels.wedge_vector(cols, M.p, combos))
        keep_idx.append(i)
    if skipped:
        log.warning("skipped %d dependent members (first %d)", len(skipped), skipped[0])
    if not vecs:
        return []
    mask = kernels.greedy_independent(np.array(vecs), M.p)
    out = [i for i, ok in zip(keep_idx, mask) if ok]
    bound = math.comb(field_rank(M), size)
    assert len(out) <= bound, f"representative set of size {len(out)} exceeds {bound}"
    return out


def essential_candidates(g: MultiGraph, S: Iterable[int], k: int, s: int, seed: int = 0,
                         p: int = DEFAULT_PRIME) -> set[int]:
    """Edges outside the terminal edges that may cross in every optimum of some instance.

    Expects a graph already reduced by pushing. Raises :class:`Rejected`.
    """
    lm = build_layered(g, S, k, s, p, seed)
    if k == 0:
        return set()
    others = [e for e in g.edge_ids() if e not in lm.terminal_edges]
    family = [tuple((i, ("s", e)) for i in range(1, s + 1)) + ((0, e),) for e in others]
    blocks = [lm.layer_rows(i) for i in range(1, s + 1)] + [lm.layer_rows(0)]
    combos = np.array(list(product(*blocks)), dtype=np.int64).reshape(-1, s + 1)
    return {others[i] for i in representative_set(lm.matrix, family, combos)}


# -- sparsification --------------------------------------------------------------------


@dataclass
class Sparsified:
    graph: MultiGraph
    kept: frozenset  # original edge ids that survive
    rejected: bool = False
    rounds: int = 0
    stats: dict = field(default_factory=dict)


def rejection_graph(g: MultiGraph, S: Sequence[int], k: int) -> MultiGraph:
    """Terminals joined pairwise by k+1 parallel edges: nothing separates them within k."""
    S = sorted(S)
    edges = [(a, b) for i, a in enumerate(S) for b in S[i + 1:] for _ in range(k + 1)]
    return MultiGraph(g.n_original, edges, {t: g.terminals[t] for t in S if t in g.terminals})


def sparsify(g: MultiGraph, S: Iterable[int] | None = None, k: int = 0, s: int | None = None,
             seed: int = 0, p: int = DEFAULT_PRIME) -> Sparsified:
    """Contract edges until every remaining one is a candidate or a terminal edge."""
    S = sorted(g.terminals if S is None else S)
    s = max(len(S), 2) if s is None else s
    if len(S) > s:
        raise ValueError(f"{len(S)} terminals but s = {s}")
    m0 = g.m
    if len(S) <= 1:
        # a single label labels everything at no cost
        h = g.contract(g.edge_ids())
        return Sparsified(h, frozenset(h.edge_ids()), stats={"edges_in": m0, "edges_out": h.m})
    h = reduce_graph(g)
    try:
        build_layered(h, S, k, 0, p, seed)
    except Rejected:
        r = rejection_graph(h, S, k)
        return Sparsified(r, frozenset(), rejected=True,
                          stats={"edges_in": m0, "edges_out": r.m})
    rounds = 0
    while True:
        rounds += 1
        z0 = essential_candidates(h, S, k, s, seed + rounds, p)
        cover = z0 | terminal_edges(h, S)
        loose = [e for e in h.edge_ids() if e not in cover]
        if not loose:
            break
        h = h.contract([loose[0]])
    return Sparsified(h, frozenset(h.edge_ids()), rounds=rounds,
                      stats={"edges_in": m0, "edges_out": h.m})


def _merge_zero_labels(cost: CostMatrix) -> tuple[CostMatrix, dict[str, str]]:
    rep: dict[str, str] = {}
    for a in cost.labels:
        rep[a] = next((b for b in cost.labels if b in rep and rep[b] == b and cost.mu(a, b) == 0), a)
    keep = [l for l in cost.labels if rep[l] == l]
    return cost.restrict(keep), rep


def kernelize(inst: Instance, seed: int = 0, p: int = DEFAULT_PRIME) -> Instance:
    """Equivalent instance whose graph keeps only edges that can matter at budget ``q``."""
    if inst.q is None:
        raise InstanceError("kernelize needs a cost budget q")
    if inst.unary:
        raise InstanceError("kernelize handles Zero Extension only")
    cost = inst.cost.cost_matrix() if isinstance(inst.cost, MetricTree) else inst.cost
    w = triangle_witness(cost)
    if w is not None:
        raise InstanceError(f"kernelize needs a metric; triangle inequality fails at {w}")
    cost, rep = _merge_zero_labels(cost)
    g = inst.graph.copy()
    for v in list(g.terminals):
        g.terminals[v] = rep[g.terminals[v]]
    red = identify_terminals(Instance(g, cost, q=inst.q, k=inst.k, name=inst.name))
    out = sparsify(red.graph, k=inst.q, s=max(len(cost.labels), 2), seed=seed, p=p)
    meta = dict(inst.meta) | {"kernel": {"rejected": out.rejected, "rounds": out.rounds,
                                         **out.stats}}
    return Instance(out.graph, cost, q=inst.q, k=inst.k, name=inst.name, meta=meta)

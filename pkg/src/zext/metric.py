"""Cost matrices, unit-edge tree metrics and rooted-tree operators."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product
from typing import Callable, Mapping, Sequence

import numpy as np


class CostError(ValueError):
    """Invalid cost matrix; ``witness`` names the offending labels."""

    def __init__(self, msg: str, witness: tuple = ()):
        super().__init__(msg)
        self.witness = witness


class ReconstructionError(ValueError):
    def __init__(self, msg: str, witness: tuple = ()):
        super().__init__(msg)
        self.witness = witness


class NoExtension(ValueError):
    def __init__(self, msg: str, witness: tuple = ()):
        super().__init__(msg)
        self.witness = witness


@dataclass(frozen=True)
class CostMatrix:
    labels: tuple[str, ...]
    mat: np.ndarray = field(compare=False)

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=np.int64)
        if m.shape != (len(self.labels), len(self.labels)):
            raise CostError(f"matrix shape {m.shape} does not match {len(self.labels)} labels")
        if len(set(self.labels)) != len(self.labels):
            raise CostError("duplicate label names")
        object.__setattr__(self, "mat", m)

    def __eq__(self, other):
        return (isinstance(other, CostMatrix) and self.labels == other.labels
                and np.array_equal(self.mat, other.mat))

    def __hash__(self):
        return hash((self.labels, self.mat.tobytes()))

    @cached_property
    def index(self) -> dict[str, int]:
        return {l: i for i, l in enumerate(self.labels)}

    def mu(self, a: str, b: str) -> int:
        return int(self.mat[self.index[a], self.index[b]])

    def restrict(self, labels: Sequence[str]) -> "CostMatrix":
        idx = [self.index[l] for l in labels]
        return CostMatrix(tuple(labels), self.mat[np.ix_(idx, idx)])


@dataclass(frozen=True)
class Classification:
    kind: str  # simple-cost | metric | tree-metric | induced-tree-metric-candidate
    witness: tuple = ()

    @property
    def is_metric(self) -> bool:
        return self.kind != "simple-cost"


def check_simple(m: CostMatrix) -> None:
    a = m.mat
    L = m.labels
    neg = np.argwhere(a < 0)
    if len(neg):
        i, j = neg[0]
        raise CostError(f"negative cost {a[i, j]} at ({L[i]}, {L[j]})", (L[i], L[j]))
    diag = np.nonzero(np.diag(a))[0]
    if len(diag):
        i = diag[0]
        raise CostError(f"nonzero diagonal at {L[i]}", (L[i], L[i]))
    asym = np.argwhere(a != a.T)
    if len(asym):
        i, j = asym[0]
        raise CostError(f"asymmetric entry at ({L[i]}, {L[j]})", (L[i], L[j]))


def triangle_witness(m: CostMatrix) -> tuple | None:
    a = m.mat
    # a[i,k] > a[i,j] + a[j,k]
    bad = a[:, None, :] > a[:, :, None] + a[None, :, :]
    hits = np.argwhere(bad)
    if len(hits) == 0:
        return None
    i, j, k = hits[0]
    L = m.labels
    return (L[i], L[j], L[k])


def four_point_witness(m: CostMatrix) -> tuple | None:
    a = m.mat
    for i, j, k, l in combinations(range(len(m.labels)), 4):
        s = sorted((a[i, j] + a[k, l], a[i, k] + a[j, l], a[i, l] + a[j, k]))
        if s[2] != s[1]:
            L = m.labels
            return (L[i], L[j], L[k], L[l])
    return None


def validate_cost(m: CostMatrix) -> Classification:
    """Classify a cost matrix; raises :class:`CostError` if it is not a simple cost."""
    check_simple(m)
    w = triangle_witness(m)
    if w is not None:
        return Classification("simple-cost", w)
    w = four_point_witness(m)
    if w is not None:
        return Classification("metric", w)
    try:
        tree = reconstruct_tree(m)
    except ReconstructionError as exc:
        # tree-like but without an integral unit-edge realization
        return Classification("metric", exc.witness)
    if tree.is_leaf_metric:
        return Classification("tree-metric")
    return Classification("induced-tree-metric-candidate")


# -- trees -----------------------------------------------------------------------


@dataclass(frozen=True)
class MetricTree:
    """Unit-edge tree with a distinguished node subset ``labels`` (the integral domain)."""

    nodes: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        n = len(self.nodes)
        if len(set(self.nodes)) != n:
            raise ReconstructionError("duplicate tree node names")
        if n == 0:
            raise ReconstructionError("empty tree")
        if len(self.edges) != n - 1:
            raise ReconstructionError(f"tree on {n} nodes needs {n - 1} edges, got {len(self.edges)}")
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise ReconstructionError(f"bad tree edge ({a}, {b})")
        if np.any(self.dist < 0):
            raise ReconstructionError("tree is disconnected")
        missing = [l for l in self.labels if l not in self.index]
        if missing:
            raise ReconstructionError(f"labels {missing} are not tree nodes")
        if len(set(self.labels)) != len(self.labels):
            raise ReconstructionError("duplicate labels")

    @classmethod
    def from_names(cls, nodes: Sequence[str], edges: Sequence[tuple[str, str]],
                   labels: Sequence[str] | None = None) -> "MetricTree":
        idx = {v: i for i, v in enumerate(nodes)}
        try:
            e = tuple((idx[a], idx[b]) for a, b in edges)
        except KeyError as exc:
            raise ReconstructionError(f"edge references unknown node {exc.args[0]}") from None
        return cls(tuple(nodes), e, tuple(labels if labels is not None else nodes))

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    @cached_property
    def adj(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.nodes]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for row in adj:
            row.sort()
        return adj

    @cached_property
    def dist(self) -> np.ndarray:
        n = len(self.nodes)
        d = np.full((n, n), -1, dtype=np.int64)
        adj = self.adj
        for s in range(n):
            d[s, s] = 0
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in adj[x]:
                    if d[s, y] < 0:
                        d[s, y] = d[s, x] + 1
                        queue.append(y)
        return d

    @cached_property
    def leaves(self) -> tuple[str, ...]:
        if len(self.nodes) == 1:
            return self.nodes
        return tuple(v for i, v in enumerate(self.nodes) if len(self.adj[i]) == 1)

    @property
    def is_leaf_metric(self) -> bool:
        return set(self.labels) == set(self.leaves)

    @cached_property
    def label_nodes(self) -> np.ndarray:
        return np.array([self.index[l] for l in self.labels], dtype=np.int64)

    def cost_matrix(self) -> CostMatrix:
        """Induced metric on the labels."""
        i = self.label_nodes
        return CostMatrix(self.labels, self.dist[np.ix_(i, i)])

    def full_matrix(self) -> CostMatrix:
        """Metric on every node; the relaxed domain."""
        return CostMatrix(self.nodes, self.dist)

    def d(self, a: str, b: str) -> int:
        return int(self.dist[self.index[a], self.index[b]])

    def path(self, x: int, y: int) -> list[int]:
        """Node indices of P[x, y]."""
        out = [x]
        while x != y:
            x = next(z for z in self.adj[x] if self.dist[z, y] == self.dist[x, y] - 1)
            out.append(x)
        return out

    def rooted(self, root: int | str = 0) -> "RootedOps":
        if isinstance(root, str):
            root = self.index[root]
        return RootedOps(self, root)


def _fresh_names(avoid: set[str]):
    i = 0
    while True:
        name = f"_{i}"
        i += 1
        if name not in avoid:
            yield name


def reconstruct_tree(m: CostMatrix) -> MetricTree:
    """Unit-edge tree whose node distances reproduce ``m`` on its labels."""
    check_simple(m)
    L = list(m.labels)
    a = m.mat
    if len(L) == 0:
        raise ReconstructionError("no labels")
    names = _fresh_names(set(L))
    nodes = [L[0]]
    adj: list[list[int]] = [[]]
    where = {0: 0}  # label index -> node index

    def bfs_from(s):
        d = [-1] * len(nodes)
        prev = [-1] * len(nodes)
        d[s] = 0
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if d[y] < 0:
                    d[y] = d[x] + 1
                    prev[y] = x
                    queue.append(y)
        return d, prev

    def add_node(name, attach):
        nodes.append(name)
        adj.append([])
        j = len(nodes) - 1
        if attach is not None:
            adj[attach].append(j)
            adj[j].append(attach)
        return j

    for c in range(1, len(L)):
        placed = sorted(where)
        if len(placed) == 1:
            anchor, hang = where[placed[0]], int(a[c, placed[0]])
        else:
            best = None
            for p, q in combinations(placed, 2):
                twice = int(a[c, p] + a[c, q] - a[p, q])
                if best is None or twice < best[0]:
                    best = (twice, p, q)
            twice, p, q = best
            if twice % 2:
                raise ReconstructionError(
                    f"label {L[c]} sits at half-integral distance from the tree", (L[c], L[p], L[q]))
            hang = twice // 2
            along = int(a[c, p]) - hang
            dq, prev = bfs_from(where[q])
            # walk from p toward q
            x = where[p]
            for _ in range(along):
                x = prev[x]
                if x < 0:
                    raise ReconstructionError("inconsistent distances", (L[c], L[p], L[q]))
            anchor = x
        if hang < 0:
            raise ReconstructionError("inconsistent distances", (L[c],))
        if hang == 0:
            if nodes[anchor] in L:
                raise ReconstructionError(
                    f"labels {nodes[anchor]} and {L[c]} would share a node", (nodes[anchor], L[c]))
            nodes[anchor] = L[c]
            where[c] = anchor
            continue
        x = anchor
        for _ in range(hang - 1):
            x = add_node(next(names), x)
        where[c] = add_node(L[c], x)

    edges = tuple((i, j) for i in range(len(nodes)) for j in adj[i] if i < j)
    tree = MetricTree(tuple(nodes), edges, tuple(L))
    got = tree.cost_matrix().mat
    bad = np.argwhere(got != a)
    if len(bad):
        i, j = bad[0]
        w = four_point_witness(m) or (L[i], L[j])
        raise ReconstructionError(f"no unit-edge tree realizes d({L[i]},{L[j]})={a[i, j]}", w)
    return tree


# -- rooted operators --------------------------------------------------------------


class RootedOps:
    """Ancestor order and the two operator pairs for a fixed root.

    Operator tables are ``n x n`` arrays of node indices.
    """

    def __init__(self, tree: MetricTree, root: int):
        self.tree = tree
        self.root = root
        n = len(tree.nodes)
        self.parent = np.full(n, -1, dtype=np.int64)
        self.depth = tree.dist[root].copy()
        order = np.argsort(self.depth, kind="stable")
        for x in order[1:]:
            self.parent[x] = next(z for z in tree.adj[x] if self.depth[z] == self.depth[x] - 1)

    def is_ancestor(self, x: int, y: int) -> bool:
        """x precedes y in the ancestor order (x lies on P[root, y])."""
        d = self.tree.dist
        return d[self.root, x] + d[x, y] == d[self.root, y]

    def lca(self, x: int, y: int) -> int:
        while self.depth[x] > self.depth[y]:
            x = self.parent[x]
        while self.depth[y] > self.depth[x]:
            y = self.parent[y]
        while x != y:
            x, y = self.parent[x], self.parent[y]
        return int(x)

    def lcaskew(self, x: int, y: int) -> int:
        steps = int(self.tree.dist[y, self.lca(x, y)])
        return self.tree.path(x, y)[steps]

    def mids(self, x: int, y: int) -> tuple[int, int]:
        p = self.tree.path(x, y)
        if len(p) % 2:
            z = p[len(p) // 2]
            return z, z
        z1, z2 = p[len(p) // 2 - 1], p[len(p) // 2]
        return (z1, z2) if self.depth[z1] < self.depth[z2] else (z2, z1)

    def midup(self, x: int, y: int) -> int:
        return self.mids(x, y)[0]

    def middown(self, x: int, y: int) -> int:
        return self.mids(x, y)[1]

    def _table(self, fn) -> np.ndarray:
        n = len(self.tree.nodes)
        t = np.empty((n, n), dtype=np.int64)
        for x in range(n):
            for y in range(n):
                t[x, y] = fn(x, y)
        return t

    @cached_property
    def tables(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        return {
            "strong": (self._table(self.midup), self._table(self.middown)),
            "weak": (self._table(self.lca), self._table(self.lcaskew)),
        }


def _tabulate(f, n: int, arity: int) -> np.ndarray:
    if isinstance(f, np.ndarray):
        return f.astype(np.int64)
    t = np.empty((n,) * arity, dtype=np.int64)
    for xs in product(range(n), repeat=arity):
        t[xs] = f(*xs)
    return t


def check_multimorphism(f: Callable | np.ndarray, ops: RootedOps, pair: str = "strong",
                        arity: int = 2, domain: Sequence[int] | None = None):
    """Exhaustively test f(x)+f(y) >= f(x o y)+f(x * y); ``None`` or a violating pair.

    ``f`` is either a callable on node indices or an ``n**arity`` table.
    """
    n = len(ops.tree.nodes)
    F = _tabulate(f, n, arity)
    up, down = ops.tables[pair]
    dom = np.arange(n) if domain is None else np.asarray(domain, dtype=np.int64)
    for xs in product(dom, repeat=arity):
        xs = np.array(xs)
        # vectorize over every y tuple at once
        ys = np.array(np.meshgrid(*([dom] * arity), indexing="ij")).reshape(arity, -1)
        lhs = F[tuple(xs)] + F[tuple(ys)]
        a = up[xs[:, None], ys]
        b = down[xs[:, None], ys]
        rhs = F[tuple(a)] + F[tuple(b)]
        bad = np.nonzero(lhs < rhs)[0]
        if len(bad):
            j = bad[0]
            return tuple(int(v) for v in xs), tuple(int(v) for v in ys[:, j])
    return None


def strong_identity_holds(tree: MetricTree, ops: RootedOps, a: int, b: int, x: int, y: int,
                          pair: str = "strong") -> bool:
    up, down = ops.tables[pair]
    d = tree.dist
    return d[a, b] + d[x, y] == d[up[a, x], up[b, y]] + d[down[a, x], down[b, y]]


def equality_support(tree: MetricTree, a: int, b: int, x: int, y: int) -> bool:
    """Whether (a,b),(x,y) attain equality for the distance under the midpoint pair.

    Decided by the collinearity rule: all four lie on one path P and, in the
    order of P, a and b sit in the same order as x and y (ties allowed).
    """
    d = tree.dist
    pts = (a, b, x, y)
    # endpoints of the spanning path are the farthest pair among the four
    u, v = max(combinations(pts, 2), key=lambda p: d[p[0], p[1]])
    if any(d[u, z] + d[z, v] != d[u, v] for z in pts):
        return False
    pa, pb, px, py = (int(d[u, z]) for z in pts)
    return (pa - pb) * (px - py) >= 0


def check_interpolation(f: Mapping[str, int] | Sequence[int], tree: MetricTree):
    """``None`` if f is convex along every tree path, else a witness (u, v, i)."""
    n = len(tree.nodes)
    vals = [f[v] for v in tree.nodes] if isinstance(f, Mapping) else list(f)
    for u in range(n):
        for v in range(u + 1, n):
            p = tree.path(u, v)
            dd = len(p) - 1
            for i in range(1, dd):
                if dd * vals[p[i]] > (dd - i) * vals[u] + i * vals[v]:
                    return tree.nodes[u], tree.nodes[v], i
    return None


def extend_unary(f0: Mapping[str, int], tree: MetricTree) -> dict[str, int]:
    """Extend label costs to every tree node so they interpolate along paths.

    Leaf metrics are padded with zeros. Otherwise free nodes start high and are
    tightened to the largest value convexity allows; the result is always
    validated and :class:`NoExtension` is raised instead of returning a bad one.
    """
    if any(v < 0 for v in f0.values()):
        raise NoExtension("unary costs must be nonnegative")
    missing = [l for l in tree.labels if l not in f0]
    if missing:
        raise NoExtension(f"no unary cost for labels {missing}")
    if tree.is_leaf_metric:
        return {v: int(f0.get(v, 0)) if v in tree.labels else 0 for v in tree.nodes}
    n = len(tree.nodes)
    fixed = {tree.index[l] for l in tree.labels}
    big = max(f0.values(), default=0) * (n + 1) + 1
    vals = [int(f0[v]) if i in fixed else big for i, v in enumerate(tree.nodes)]
    paths = [(u, v, tree.path(u, v)) for u in range(n) for v in range(u + 1, n)]
    changed = True
    while changed:
        changed = False
        for u, v, p in paths:
            dd = len(p) - 1
            for i in range(1, dd):
                w = p[i]
                if w in fixed:
                    continue
                cap = ((dd - i) * vals[u] + i * vals[v]) // dd
                if cap < vals[w]:
                    vals[w] = cap
                    changed = True
    out = {v: vals[i] for i, v in enumerate(tree.nodes)}
    w = check_interpolation(vals, tree)
    if w is not None:
        raise NoExtension(f"no interpolating extension found; violated at {w}", w)
    return out

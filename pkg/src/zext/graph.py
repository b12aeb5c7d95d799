"""Undirected multigraph with contraction, and an augmenting-path flow engine.

Edges keep their ids for their whole life. Contracting an edge identifies its
endpoints; edges that become self-loops are dropped. Vertex ids are the
original integers; a merged vertex is represented by one of its members
(a terminal if there is one, otherwise the smallest id).
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from . import kernels

INF_CAP = 1 << 40  # exceeds every finite cut the package ever builds


class GraphError(ValueError):
    pass


class MultiGraph:
    """Multigraph over integer vertex ids with stable edge ids."""

    __slots__ = ("_verts", "_edges", "_adj", "terminals", "_rep")

    def __init__(self, n: int = 0, edges: Iterable[tuple[int, int]] = (),
                 terminals: Mapping[int, str] | None = None):
        self._verts: set[int] = set(range(n))
        self._edges: dict[int, tuple[int, int]] = {}
        self._adj: dict[int, set[int]] = {v: set() for v in range(n)}
        self.terminals: dict[int, str] = dict(terminals or {})
        self._rep: list[int] = list(range(n))
        for eid, (u, v) in enumerate(edges):
            if u not in self._verts or v not in self._verts:
                raise GraphError(f"edge {eid} references unknown vertex ({u}, {v})")
            if u == v:
                continue  # self-loops never cross
            self._edges[eid] = (u, v)
            self._adj[u].add(eid)
            self._adj[v].add(eid)
        for t in self.terminals:
            if t not in self._verts:
                raise GraphError(f"terminal {t} is not a vertex")

    # -- basic views -------------------------------------------------------

    def copy(self) -> "MultiGraph":
        g = MultiGraph.__new__(MultiGraph)
        g._verts = set(self._verts)
        g._edges = dict(self._edges)
        g._adj = {v: set(es) for v, es in self._adj.items()}
        g.terminals = dict(self.terminals)
        g._rep = list(self._rep)
        return g

    @property
    def n(self) -> int:
        return len(self._verts)

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def n_original(self) -> int:
        return len(self._rep)

    def vertices(self) -> list[int]:
        return sorted(self._verts)

    def edge_ids(self) -> list[int]:
        return sorted(self._edges)

    def edges(self) -> list[tuple[int, int, int]]:
        return [(e, *self._edges[e]) for e in sorted(self._edges)]

    def has_vertex(self, v: int) -> bool:
        return v in self._verts

    def has_edge(self, e: int) -> bool:
        return e in self._edges

    def endpoints(self, e: int) -> tuple[int, int]:
        try:
            return self._edges[e]
        except KeyError:
            raise GraphError(f"edge {e} is not live") from None

    def incident(self, v: int) -> list[int]:
        return sorted(self._adj[v])

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def other(self, e: int, v: int) -> int:
        a, b = self._edges[e]
        return b if a == v else a

    def neighbors(self, v: int) -> set[int]:
        return {self.other(e, v) for e in self._adj[v]}

    def find(self, v: int) -> int:
        """Current vertex that original vertex ``v`` was merged into."""
        return self._rep[v]

    def contraction_map(self) -> list[int]:
        return list(self._rep)

    def boundary(self, side: Iterable[int]) -> set[int]:
        side = set(side)
        out = set()
        for v in side:
            for e in self._adj[v]:
                if self.other(e, v) not in side:
                    out.add(e)
        return out

    def inside(self, side: Iterable[int]) -> set[int]:
        side = set(side)
        return {e for v in side for e in self._adj[v] if self.other(e, v) in side}

    def components(self) -> list[list[int]]:
        seen: set[int] = set()
        comps = []
        for s in sorted(self._verts):
            if s in seen:
                continue
            comp = [s]
            seen.add(s)
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for e in self._adj[x]:
                    y = self.other(e, x)
                    if y not in seen:
                        seen.add(y)
                        comp.append(y)
                        queue.append(y)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def induced(self, keep: Iterable[int]) -> "MultiGraph":
        """Subgraph on ``keep``; ids, terminals and the contraction map are kept."""
        keep = set(keep)
        g = MultiGraph.__new__(MultiGraph)
        g._verts = keep & self._verts
        g._edges = {e: uv for e, uv in self._edges.items() if uv[0] in keep and uv[1] in keep}
        g._adj = {v: {e for e in self._adj[v] if e in g._edges} for v in g._verts}
        g.terminals = {v: l for v, l in self.terminals.items() if v in keep}
        g._rep = list(self._rep)
        return g

    # -- mutation (callers copy first) -------------------------------------

    def merge(self, group: Iterable[int]) -> int:
        """Identify a set of live vertices in place and return the survivor."""
        group = sorted(set(group))
        for v in group:
            if v not in self._verts:
                raise GraphError(f"vertex {v} is not live")
        if len(group) <= 1:
            return group[0] if group else -1
        labels = {self.terminals[v] for v in group if v in self.terminals}
        if len(labels) > 1:
            raise GraphError(f"merging terminals with different labels {sorted(labels)}")
        term = [v for v in group if v in self.terminals]
        keep = term[0] if term else group[0]
        gone = set(group) - {keep}
        touched = set().union(*(self._adj[v] for v in group))
        for v in gone:
            del self._adj[v]
            self._verts.discard(v)
            self.terminals.pop(v, None)
        for e in touched:
            a, b = self._edges[e]
            a = keep if a in gone else a
            b = keep if b in gone else b
            if a == b:
                del self._edges[e]
                self._adj[keep].discard(e)
            else:
                self._edges[e] = (a, b)
                self._adj[keep].add(e)
        for i, r in enumerate(self._rep):
            if r in gone:
                self._rep[i] = keep
        return keep

    def contract(self, edge_ids: Iterable[int]) -> "MultiGraph":
        """Copy of the graph with the given edges contracted."""
        edge_ids = list(edge_ids)
        for e in edge_ids:
            if e not in self._edges:
                raise GraphError(f"edge {e} is not live")
        g = self.copy()
        # union-find over the endpoints, then merge each class once
        parent: dict[int, int] = {}

        def root(x):
            while parent.get(x, x) != x:
                x = parent[x]
            return x

        for e in edge_ids:
            a, b = self._edges[e]
            ra, rb = root(a), root(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        groups: dict[int, list[int]] = {}
        for v in parent:
            groups.setdefault(root(v), []).append(v)
        for r, members in groups.items():
            g.merge(members + [r])
        return g

    def remove_edges(self, edge_ids: Iterable[int]) -> "MultiGraph":
        g = self.copy()
        for e in edge_ids:
            a, b = g._edges.pop(e)
            g._adj[a].discard(e)
            g._adj[b].discard(e)
        return g

    def signature(self) -> tuple:
        """Hashable structural key (vertex set, edge list, terminal marks)."""
        return (tuple(sorted(self._verts)),
                tuple((e, *self._edges[e]) for e in sorted(self._edges)),
                tuple(sorted(self.terminals.items())))


# -- flows ---------------------------------------------------------------------


@dataclass(frozen=True)
class CutResult:
    edges: frozenset
    side: frozenset
    value: int


class FlowState:
    """Max-flow between vertex sets, with a super source and super sink.

    Every graph edge is a pair of opposite arcs of equal capacity (unit unless
    ``caps`` says otherwise). Extra arcs can be added later; :meth:`augment`
    continues from the current flow, so adding capacity never restarts work.
    """

    def __init__(self, g: MultiGraph, sources: Iterable[int], sinks: Iterable[int],
                 caps: Mapping[int, int] | None = None, cap_limit: int | None = None):
        sources, sinks = set(sources), set(sinks)
        if sources & sinks:
            raise GraphError(f"source and sink sets overlap: {sorted(sources & sinks)}")
        self.graph = g
        verts = g.vertices()
        self.index = {v: i for i, v in enumerate(verts)}
        self.names = verts
        self.src = len(verts)
        self.snk = len(verts) + 1
        self.head: list[list[int]] = [[] for _ in range(len(verts) + 2)]
        self.to: list[int] = []
        self.res: list[int] = []
        self.cap: list[int] = []
        self.edge_of: list[int] = []
        self.value = 0
        self.aborted = False
        self.cap_limit = cap_limit
        self.sources = set(sources)
        self.sinks = set(sinks)
        for e, a, b in g.edges():
            c = 1 if caps is None else caps.get(e, 1)
            self._pair(self.index[a], self.index[b], c, c, e)
        for s in sources:
            self._pair(self.src, self.index[s], INF_CAP, 0, -1)
        for t in sinks:
            self._pair(self.index[t], self.snk, INF_CAP, 0, -1)
        self.augment()

    def _pair(self, a: int, b: int, cab: int, cba: int, edge: int) -> None:
        i = len(self.to)
        self.to += [b, a]
        self.res += [cab, cba]
        self.cap += [cab, cba]
        self.edge_of += [edge, edge]
        self.head[a].append(i)
        self.head[b].append(i + 1)

    def copy(self) -> "FlowState":
        f = FlowState.__new__(FlowState)
        f.graph = self.graph
        f.index = self.index
        f.names = self.names
        f.src, f.snk = self.src, self.snk
        f.head = [list(h) for h in self.head]
        f.to = list(self.to)
        f.res = list(self.res)
        f.cap = list(self.cap)
        f.edge_of = list(self.edge_of)
        f.value = self.value
        f.aborted = self.aborted
        f.cap_limit = self.cap_limit
        f.sources = set(self.sources)
        f.sinks = set(self.sinks)
        return f

    # -- edits ----------------------------------------------------------

    def add_arc(self, a, b, cap: int, undirected: bool = False) -> None:
        """Add an arc between vertices (or ``"s"``/``"t"`` for the super nodes)."""
        ia, ib = self._node(a), self._node(b)
        self._pair(ia, ib, cap, cap if undirected else 0, -1)

    def tie(self, v: int, to_source: bool) -> None:
        """Attach ``v`` to the source or sink side with an infinite arc."""
        if to_source:
            self.add_arc("s", v, INF_CAP)
            self.sources.add(v)
        else:
            self.add_arc(v, "t", INF_CAP)
            self.sinks.add(v)

    def _node(self, x) -> int:
        if x == "s":
            return self.src
        if x == "t":
            return self.snk
        return self.index[x]

    # -- augmentation ---------------------------------------------------

    def augment(self) -> int:
        """Augment along shortest residual paths until maximum (or the cap)."""
        limit = self.cap_limit
        while not self.aborted:
            prev = self._bfs_path()
            if prev is None:
                break
            path = []
            x = self.snk
            while x != self.src:
                a = prev[x]
                path.append(a)
                x = self.to[a ^ 1]
            push = min(self.res[a] for a in path)
            for a in path:
                self.res[a] -= push
                self.res[a ^ 1] += push
            self.value += push
            if limit is not None and self.value > limit:
                self.aborted = True
        return self.value

    augment_to_max = augment

    def _bfs_path(self):
        prev = [-1] * len(self.head)
        prev[self.src] = -2
        queue = deque([self.src])
        while queue:
            x = queue.popleft()
            for a in self.head[x]:
                if self.res[a] > 0:
                    y = self.to[a]
                    if prev[y] == -1:
                        prev[y] = a
                        if y == self.snk:
                            return prev
                        queue.append(y)
        return None

    @property
    def infinite(self) -> bool:
        return self.value >= INF_CAP

    # -- cuts -----------------------------------------------------------

    def _forward(self) -> set[int]:
        seen = {self.src}
        queue = deque([self.src])
        while queue:
            x = queue.popleft()
            for a in self.head[x]:
                y = self.to[a]
                if self.res[a] > 0 and y not in seen:
                    seen.add(y)
                    queue.append(y)
        return seen

    def _backward(self) -> set[int]:
        seen = {self.snk}
        queue = deque([self.snk])
        while queue:
            y = queue.popleft()
            for a in self.head[y]:
                x = self.to[a]
                if self.res[a ^ 1] > 0 and x not in seen:
                    seen.add(x)
                    queue.append(x)
        return seen

    def _cut(self, side_idx: set[int]) -> CutResult:
        side = frozenset(self.names[i] for i in side_idx if i < self.src)
        edges = frozenset(self.graph.boundary(side))
        return CutResult(edges, side, self.value)

    def closest(self) -> CutResult:
        return self._cut(self._forward())

    def furthest(self) -> CutResult:
        back = self._backward()
        return self._cut(set(range(len(self.head))) - back)


def max_flow_unit(g: MultiGraph, S: Iterable[int], T: Iterable[int],
                  cap_limit: int | None = None) -> FlowState:
    """Maximum number of edge-disjoint S-T paths, as a resumable flow."""
    S, T = set(S), set(T)
    if not S or not T:
        raise GraphError("source and sink sets must be nonempty")
    return FlowState(g, S, T, cap_limit=cap_limit)


def closest_min_cut(f: FlowState) -> CutResult:
    return f.closest()


def furthest_min_cut(f: FlowState) -> CutResult:
    return f.furthest()


def contract(g: MultiGraph, edges: Iterable[int]) -> MultiGraph:
    return g.contract(edges)


def isolating_flow(g: MultiGraph, t: int, others: Iterable[int],
                   cap_limit: int | None = None) -> FlowState | None:
    others = set(others) - {t}
    if not others:
        return None
    return FlowState(g, {t}, others, cap_limit=cap_limit)


def half_integral_bound(g: MultiGraph, terminals: Iterable[int]) -> Fraction:
    """Half the sum of isolating max-flows; a lower bound on crossings."""
    S = sorted(set(terminals))
    if len(S) < 2:
        return Fraction(0)
    total = 0
    for t in S:
        total += FlowState(g, {t}, set(S) - {t}).value
    return Fraction(total, 2)


# -- good separations ----------------------------------------------------------


def _side_ok(g: MultiGraph, side: set[int]) -> bool:
    return g.induced(side).is_connected()


def good_separation(g: MultiGraph, sigma: int, k: int, trials: int = 200,
                    rng: random.Random | None = None) -> tuple[frozenset, frozenset] | None:
    """Connected split with both sides larger than ``sigma`` and at most ``k`` cut edges.

    Exhaustive up to 20 vertices. Above that, random contraction trials; a
    miss there is one-sided (the caller falls back to the high-connectivity
    solver, which stays correct).
    """
    verts = g.vertices()
    n = len(verts)
    if n < 2 * (sigma + 1):
        return None
    if n <= 20:
        idx = {v: i for i, v in enumerate(verts)}
        eu = [idx[a] for _, a, _ in g.edges()]
        ev = [idx[b] for _, _, b in g.edges()]
        mask = kernels.best_separation(n, eu, ev, sigma, k)
        if mask < 0:
            return None
        left = frozenset(v for v in verts if (mask >> idx[v]) & 1)
        return left, frozenset(verts) - left
    rng = rng or random.Random(0)
    best = None
    edge_list = g.edges()
    for _ in range(trials):
        parent = {v: v for v in verts}

        def root(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        parts = n
        order = list(edge_list)
        rng.shuffle(order)
        for _, a, b in order:
            if parts <= 2:
                break
            ra, rb = root(a), root(b)
            if ra != rb:
                parent[ra] = rb
                parts -= 1
        if parts != 2:
            continue
        r0 = root(verts[0])
        left = {v for v in verts if root(v) == r0}
        right = set(verts) - left
        if len(left) <= sigma or len(right) <= sigma:
            continue
        cut = len(g.boundary(left))
        if cut > k or not (_side_ok(g, left) and _side_ok(g, right)):
            continue
        key = (cut, abs(len(left) - len(right)), min(left))
        if best is None or key < best[0]:
            best = (key, frozenset(left), frozenset(right))
    return None if best is None else (best[1], best[2])


def reach(g: MultiGraph, start: Iterable[int], removed: Iterable[int] = ()) -> set[int]:
    """Vertices reachable from ``start`` without using ``removed`` edges."""
    removed = set(removed)
    seen = set(start)
    queue = deque(seen)
    while queue:
        x = queue.popleft()
        for e in g.incident(x):
            if e in removed:
                continue
            y = g.other(e, x)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def furthest_region(g: MultiGraph, sources: Iterable[int], sinks: Iterable[int],
                    cap_limit: int | None = None) -> tuple[int, set[int], bool]:
    """(cut value, region, aborted) for the furthest min cut between two sets.

    The region is what ``sources`` still reach once the cut is removed. With no
    sink reachable it is the whole component and the value is 0.
    """
    sources, sinks = set(sources), set(sinks)
    comp = reach(g, sources)
    if not (sinks & comp):
        return 0, comp, False
    f = FlowState(g, sources, sinks & comp, cap_limit=cap_limit)
    if f.aborted:
        return f.value, set(sources), True
    cut = f.furthest()
    return f.value, reach(g, sources, cut.edges), False

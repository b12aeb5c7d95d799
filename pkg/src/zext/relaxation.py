"""Tree-metric relaxation: a min-cut value oracle and the gap-parameterized solvers.

Labels may be any node of the tree T. For a rooted T, a labelling decomposes
into one cut per tree edge (x parent, y child): the vertices labelled inside
the subtree below y. Its cost is the sum of those cut sizes, so the relaxed
optimum is the sum of independent per-edge minimum cuts. Unary costs add
per-vertex arcs to these networks.

The solvers branch on forced assignments in best-first order of the relaxed
value, so the first integral labelling found is optimal.
"""

from __future__ import annotations

import heapq
import itertools
from typing import Mapping, Sequence

import numpy as np

from .graph import FlowState, MultiGraph, reach
from .instance import (INF, Instance, InstanceError, Solution, evaluate, identify_terminals,
                       lift, members_of)
from .metric import MetricTree, check_interpolation

# Fall back to exhaustive search when the cut-based assignment is inconsistent.
BRUTE_FALLBACK = True
FALLBACK_CAP = 200_000


class NotInterpolating(ValueError):
    def __init__(self, msg: str, witness: tuple = ()):
        super().__init__(msg)
        self.witness = witness


class GapSearchError(RuntimeError):
    pass


def _default_root(tree: MetricTree) -> int:
    inner = [i for i in range(len(tree.nodes)) if len(tree.adj[i]) > 1]
    return inner[0] if inner else 0


def unary_gradients(sigma: np.ndarray, tree: MetricTree, root: int = 0):
    """Per root-oriented tree edge (x, y), the array ``sigma[:, y] - sigma[:, x]``.

    ``sigma`` is ``vertices x nodes``. Returns ``(edges, deltas)``.
    """
    sigma = np.asarray(sigma, dtype=np.int64)
    parent = _orient(tree, root)[0]
    edges = [(parent[y], y) for y in _orient(tree, root)[1] if y != root]
    deltas = [sigma[:, y] - sigma[:, x] for x, y in edges]
    # telescoping check: summing down the root path recovers sigma
    acc = np.zeros_like(sigma)
    acc[:, root] = sigma[:, root]
    for (x, y), d in zip(edges, deltas):
        acc[:, y] = acc[:, x] + d
    assert np.array_equal(acc, sigma), "gradient decomposition does not telescope"
    return edges, deltas


def _orient(tree: MetricTree, root: int):
    """Parent array and BFS order from ``root``."""
    n = len(tree.nodes)
    parent = [-1] * n
    order = [root]
    seen = {root}
    for x in order:
        for y in tree.adj[x]:
            if y not in seen:
                seen.add(y)
                parent[y] = x
                order.append(y)
    return parent, order


class TreeEdgeNetworks:
    """One maximum flow per tree edge, over the live vertices of ``graph``.

    ``unary`` maps live vertices to cost arrays over tree nodes. ``forced``
    pins vertices to tree nodes on top of the terminals.
    """

    def __init__(self, graph: MultiGraph, tree: MetricTree, unary: Mapping[int, np.ndarray] | None = None,
                 root: int | None = None, forced: Mapping[int, int] | None = None):
        self.graph = graph
        self.tree = tree
        self.root = _default_root(tree) if root is None else root
        self.parent, order = _orient(tree, self.root)
        self.edges = [(self.parent[y], y) for y in order if y != self.root]
        below = {y: {y} for y in order}
        for y in reversed(order):
            if self.parent[y] >= 0:
                below[self.parent[y]] |= below[y]
        self.below = below
        self.unary = dict(unary) if unary else {}
        self.fixed: dict[int, int] = {}
        for v, l in graph.terminals.items():
            if l not in tree.index:
                raise InstanceError(f"terminal label {l!r} is not a tree node")
            self.fixed[v] = tree.index[l]
        self.offset = 0
        for v, row in self.unary.items():
            self.offset += int(row[self.root])
        self.flows: list[FlowState] = []
        for x, y in self.edges:
            sub = below[y]
            src = [v for v, z in self.fixed.items() if z in sub]
            snk = [v for v, z in self.fixed.items() if z not in sub]
            f = FlowState(graph, src, snk)
            for v, row in self.unary.items():
                d = int(row[y] - row[x])
                if d > 0:
                    f.add_arc(v, "t", d)
                elif d < 0:
                    f.add_arc("s", v, -d)
                    self.offset += d
            f.augment()
            self.flows.append(f)
        for v, z in (forced or {}).items():
            self._tie(v, z)

    def copy(self) -> "TreeEdgeNetworks":
        out = TreeEdgeNetworks.__new__(TreeEdgeNetworks)
        out.__dict__.update(self.__dict__)
        out.fixed = dict(self.fixed)
        out.flows = [f.copy() for f in self.flows]
        return out

    def _tie(self, v: int, z: int) -> None:
        if v in self.fixed:
            if self.fixed[v] != z:
                raise InstanceError(f"vertex {v} is already pinned to {self.tree.nodes[self.fixed[v]]}")
            return
        self.fixed[v] = z
        for (x, y), f in zip(self.edges, self.flows):
            f.tie(v, z in self.below[y])
            f.augment()

    @property
    def value(self):
        if any(f.infinite for f in self.flows):
            return INF
        return sum(f.value for f in self.flows) + self.offset

    def cut_values(self) -> list[int]:
        return [f.value for f in self.flows]

    def force(self, v: int, z: int | str) -> "TreeEdgeNetworks":
        """Copy with ``v`` pinned to node ``z``; the original is untouched."""
        if isinstance(z, str):
            if z not in self.tree.index:
                raise InstanceError(f"{z!r} is not a tree node")
            z = self.tree.index[z]
        if not 0 <= z < len(self.tree.nodes):
            raise InstanceError(f"tree node index {z} out of range")
        if v in self.graph.terminals:
            raise InstanceError(f"vertex {v} is a terminal")
        out = self.copy()
        out._tie(v, z)
        return out

    def assignment(self) -> dict[int, int]:
        """Node per live vertex from closest cuts, descending from the root."""
        regions = {y: f.closest().side for (_, y), f in zip(self.edges, self.flows)}
        kids: dict[int, list[int]] = {}
        for x, y in self.edges:
            kids.setdefault(x, []).append(y)
        out = {}
        for v in self.graph.vertices():
            z = self.root
            while True:
                nxt = next((c for c in kids.get(z, ()) if v in regions[c]), None)
                if nxt is None:
                    break
                z = nxt
            out[v] = z
        return out

    def cost_of(self, lab: Mapping[int, int]) -> int:
        d = self.tree.dist
        cost = sum(int(d[lab[a], lab[b]]) for _, a, b in self.graph.edges())
        for v, row in self.unary.items():
            cost += int(row[lab[v]])
        return cost


# -- construction from instances ------------------------------------------------------


def _require_tree(inst: Instance) -> MetricTree:
    if not inst.is_tree:
        raise InstanceError("the relaxation needs a tree metric")
    return inst.tree


def _live_unary(inst: Instance, g: MultiGraph) -> dict[int, np.ndarray]:
    """Summed unary rows over tree nodes per live vertex; refuses non-interpolating rows."""
    if not inst.unary:
        return {}
    tree = inst.tree
    ext = inst.unary_extended()
    for v, row in ext.items():
        w = check_interpolation(row, tree)
        if w is not None:
            raise NotInterpolating(f"unary costs of vertex {v} do not interpolate at {w}", w)
    out = {}
    for v, mem in members_of(g).items():
        rows = [ext[o] for o in mem if o in ext]
        if rows:
            out[v] = np.array([sum(r[l] for r in rows) for l in tree.nodes], dtype=np.int64)
    return out


def build_networks(inst: Instance) -> TreeEdgeNetworks:
    """Networks for the instance graph as given (terminals are not identified)."""
    return TreeEdgeNetworks(inst.graph, _require_tree(inst), _live_unary(inst, inst.graph))


def relaxed_value(nets: TreeEdgeNetworks) -> int:
    return nets.value


def force_assignment(nets: TreeEdgeNetworks, v: int, z) -> TreeEdgeNetworks:
    return nets.force(v, z)


def _relaxed_instance(inst: Instance, g: MultiGraph, fixed: Mapping[int, int]) -> Instance:
    tree = inst.tree
    full = MetricTree(tree.nodes, tree.edges, tree.nodes)
    h = g.copy()
    for v, z in fixed.items():
        h.terminals[v] = tree.nodes[z]
    unary = inst.unary_extended() if inst.unary else None
    return Instance(h, full, unary=unary)


def relaxed_assignment(nets: TreeEdgeNetworks, inst: Instance | None = None,
                       fallback: bool | None = None) -> dict[int, str]:
    """Optimal labelling over tree nodes, keyed by live vertex.

    Read off nested closest cuts; the cost is checked against the relaxed
    value and, on mismatch, recomputed by exhaustive search when allowed.
    """
    lab = nets.assignment()
    if nets.cost_of(lab) == nets.value:
        return {v: nets.tree.nodes[z] for v, z in lab.items()}
    fallback = BRUTE_FALLBACK if fallback is None else fallback
    if not fallback or inst is None:
        raise GapSearchError("cut regions do not form a consistent relaxed labelling")
    from .oracle import brute_solve

    sol = brute_solve(_relaxed_instance(inst, nets.graph, nets.fixed), cap=FALLBACK_CAP)
    return {v: sol.labelling[v] for v in nets.graph.vertices()}


def relaxed_value_ml(inst: Instance, fallback: bool | None = None) -> int:
    """Relaxed optimum with unary costs.

    Non-interpolating unary costs are refused, or answered by exhaustive
    search when ``fallback`` is on.
    """
    fallback = BRUTE_FALLBACK if fallback is None else fallback
    try:
        return build_networks(inst).value
    except NotInterpolating:
        if not fallback:
            raise
    from .oracle import brute_solve

    sol = brute_solve(_relaxed_instance(inst, inst.graph, {}), cap=FALLBACK_CAP)
    return INF if sol is INF else sol.cost


def integral_support(nets: TreeEdgeNetworks, v: int, domain: Sequence[str],
                     rho: int | None = None) -> list[str]:
    """Integral labels that keep the relaxed value when forced on ``v``."""
    if v in nets.graph.terminals:
        return [nets.graph.terminals[v]]
    if v in nets.fixed:
        return [nets.tree.nodes[nets.fixed[v]]]
    rho = nets.value if rho is None else rho
    return [d for d in domain if nets.force(v, d).value == rho]


# -- best-first gap search ------------------------------------------------------------


class _Search:
    """Best-first branching over forced assignments."""

    def __init__(self, domain: Sequence[str], q, stats: dict):
        self.domain = list(domain)
        self.q = q
        self.stats = stats
        stats.setdefault("nodes", 0)
        stats.setdefault("branches", 0)
        stats.setdefault("pruned", 0)

    def run(self, nets: TreeEdgeNetworks, step):
        """``step(nets)`` returns ``("done", labelling)`` or ``("branch", children)``."""
        tick = itertools.count()
        heap = [(nets.value, next(tick), nets)]
        while heap:
            rho, _, cur = heapq.heappop(heap)
            if self.q is not None and rho > self.q:
                self.stats["pruned"] += 1
                continue
            self.stats["nodes"] += 1
            kind, payload = step(cur, rho)
            if kind == "done":
                self.stats["branches"] += 1
                return rho, payload
            kept = 0
            for child in payload:
                val = child.value
                if val is INF or (self.q is not None and val > self.q):
                    self.stats["pruned"] += 1
                    continue
                heapq.heappush(heap, (val, next(tick), child))
                kept += 1
            if not kept:
                self.stats["branches"] += 1
        return None


def _leaf_step(domain: Sequence[str]):
    def step(nets: TreeEdgeNetworks, rho):
        tree = nets.tree
        verts = nets.graph.vertices()
        owner: dict[int, int] = {}  # label node -> smallest pinned vertex
        for v, z in nets.fixed.items():
            owner[z] = min(owner.get(z, v), v)
        regions: dict[int, set[int]] = {}
        for (x, y), f in zip(nets.edges, nets.flows):
            for leaf, inner in ((y, True), (x, False)):
                if leaf not in owner or len(tree.adj[leaf]) != 1:
                    continue
                if inner and y == leaf:
                    cut = f.furthest()
                    side = cut.side & reach(nets.graph, f.sources, cut.edges)
                elif not inner and x == leaf and x == nets.root:
                    cut = f.closest()
                    side = (set(verts) - cut.side) & reach(nets.graph, f.sinks, cut.edges)
                else:
                    continue
                regions[leaf] = set(side)
        where: dict[int, list[int]] = {v: [] for v in verts}
        for leaf, side in regions.items():
            for v in side:
                where[v].append(leaf)
        lost = [v for v in verts if not where[v]]
        if lost:
            u = lost[0]
            return "branch", [nets.force(u, d) for d in domain]
        lab = {}
        for v in verts:
            ls = where[v]
            if len(ls) > 2:
                raise GapSearchError(f"vertex {v} lies in {len(ls)} furthest regions")
            lab[v] = min(ls, key=lambda z: owner[z])
        if nets.cost_of(lab) != rho:
            raise GapSearchError("region labelling does not attain the relaxed value")
        return "done", lab
    return step


def _support_step(domain: Sequence[str]):
    def step(nets: TreeEdgeNetworks, rho):
        tree = nets.tree
        first: dict[int, int] = {}
        for v in nets.graph.vertices():
            if v in nets.fixed:
                first[v] = nets.fixed[v]
                continue
            kids = [nets.force(v, d) for d in domain]
            ok = [i for i, c in enumerate(kids) if c.value == rho]
            if not ok:
                return "branch", kids
            first[v] = tree.index[domain[ok[0]]]
        if nets.cost_of(first) != rho:
            raise GapSearchError("earliest-value labelling does not attain the relaxed value")
        return "done", first
    return step


def _split_components(inst: Instance) -> tuple[Instance, dict[int, str]]:
    """Drop components with fewer than two labels; return the rest and their constant labels."""
    g = inst.graph
    keep: list[int] = []
    const: dict[int, str] = {}
    for comp in g.components():
        labels = sorted({g.terminals[v] for v in comp if v in g.terminals})
        if len(labels) >= 2:
            keep += comp
        else:
            lab = labels[0] if labels else inst.labels[0]
            for v in comp:
                const[v] = lab
    return inst.with_graph(g.induced(keep)), const


def _finish(inst: Instance, g: MultiGraph, live: Mapping[int, str], stats: dict) -> Solution:
    full = lift(g, live)
    cost, cross = evaluate(inst, full)
    return Solution(full, cost, cross, stats)


def _solve_ze_gap(inst: Instance, step_factory, name: str, stats: dict | None) -> Solution:
    tree = _require_tree(inst)
    if inst.unary:
        raise InstanceError(f"{name} handles Zero Extension only; use solve_ml_gap")
    red = identify_terminals(inst)
    core, const = _split_components(red)
    domain = list(inst.labels)
    stats = {} if stats is None else stats
    nets = TreeEdgeNetworks(core.graph, tree)
    rho0 = nets.value
    stats["rho0"] = rho0
    if inst.q is not None:
        stats["gap"] = inst.q - rho0
    got = _Search(domain, inst.q, stats).run(nets, step_factory(domain))
    if got is None:
        return INF
    rho, lab = got
    live = {v: tree.nodes[z] for v, z in lab.items()}
    live.update(const)
    # constants live on the identified graph; lift through it
    sol = _finish(inst, red.graph, live, stats)
    assert sol.cost == rho, "gap solver cost disagrees with its relaxed value"
    return sol


def solve_leaf_gap(inst: Instance, stats: dict | None = None) -> Solution:
    """Optimal extension of cost at most ``q`` for a leaf metric, or ``INF``.

    Search counters go into ``stats`` when given, so they survive an ``INF`` answer.
    """
    if not _require_tree(inst).is_leaf_metric:
        raise InstanceError("solve_leaf_gap needs a leaf metric")
    return _solve_ze_gap(inst, _leaf_step, "solve_leaf_gap", stats)


def solve_tree_gap(inst: Instance, stats: dict | None = None) -> Solution:
    """Optimal extension of cost at most ``q`` for an induced tree metric, or ``INF``."""
    return _solve_ze_gap(inst, _support_step, "solve_tree_gap", stats)


# -- metric labelling ------------------------------------------------------------------


def _component_guesses(g: MultiGraph, comp: list[int], domain: Sequence[str]):
    """Pin patterns covering every labelling of a component.

    Each yields ``(pins, constant)``: either a constant label for the whole
    component, or pins that put two distinct labels on it.
    """
    term = {v: g.terminals[v] for v in comp if v in g.terminals}
    labels = sorted(set(term.values()))
    if len(labels) >= 2:
        yield {}, None
        return
    free = [v for v in comp if v not in term]
    if labels:
        anchors = [(None, labels[0])]
    else:
        anchors = [(free[0], l) for l in domain]
        free = free[1:]
    for a, l0 in anchors:
        yield None, l0
        pre = {} if a is None else {a: l0}
        for j, w in enumerate(free):
            for l1 in domain:
                if l1 != l0:
                    yield {**pre, **{x: l0 for x in free[:j]}, w: l1}, None


def solve_ml_gap(inst: Instance, stats: dict | None = None) -> Solution:
    """Optimal labelling with unary costs of total cost at most ``q``, or ``INF``.

    Each component gets the budget left over by the floors of the others;
    ``stats["guess_searches"]`` lists ``(branches, slack)`` per guess search.
    """
    tree = _require_tree(inst)
    red = identify_terminals(inst)
    g = red.graph
    unary = _live_unary(inst, g)
    domain = list(inst.labels)
    zero = np.zeros(len(tree.nodes), dtype=np.int64)
    stats = {} if stats is None else stats
    stats.update(nodes=0, branches=0, pruned=0, guesses=0, guess_searches=[])
    comps = []
    for comp in g.components():
        sub = g.induced(comp)
        sub_unary = {v: unary[v] for v in comp if v in unary}
        opts = []  # (lower bound, tiebreak, constant label or networks)
        for pins, const in _component_guesses(g, comp, domain):
            stats["guesses"] += 1
            if const is not None:
                z = tree.index[const]
                opts.append((sum(int(sub_unary.get(v, zero)[z]) for v in comp), len(opts), const))
                continue
            nets = TreeEdgeNetworks(sub, tree, sub_unary,
                                    forced={v: tree.index[l] for v, l in pins.items()})
            if nets.value is not INF:
                opts.append((nets.value, len(opts), nets))
        opts.sort(key=lambda o: o[:2])
        comps.append((comp, opts))
    stats["rho0"] = rho0 = sum(opts[0][0] for _, opts in comps if opts)
    if inst.q is not None:
        stats["gap"] = inst.q - rho0
        if inst.q < rho0:
            return INF
    live: dict[int, str] = {}
    total = 0
    for comp, opts in comps:
        budget = None if inst.q is None else inst.q - (rho0 - opts[0][0])
        best = None
        for low, _, what in opts:
            # only strict improvements over the incumbent are worth a search
            cap = budget if best is None else best[0] - 1 if budget is None else min(budget, best[0] - 1)
            if cap is not None and low > cap:
                stats["pruned"] += 1
                continue
            if isinstance(what, str):
                best = (low, {v: what for v in comp})
                continue
            before = stats["branches"]
            got = _Search(domain, cap, stats).run(what, _support_step(domain))
            stats["guess_searches"].append((stats["branches"] - before,
                                            None if cap is None else cap - low))
            if got is not None:
                best = (got[0], {v: tree.nodes[z] for v, z in got[1].items()})
        if best is None:
            return INF
        total += best[0]
        live.update(best[1])
    sol = _finish(inst, g, live, stats)
    assert sol.cost == total, "metric labelling solver cost disagrees with its search"
    return sol

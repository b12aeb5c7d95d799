"""Randomized-contractions solver for arbitrary simple cost functions.

Parameterized by the number of crossing edges only; crossing edges may cost
zero. Randomness enters through Monte Carlo edge splitters, and every
candidate is a genuine labelling, so the solver can miss the optimum but
never reports a cost below it.
"""

from __future__ import annotations

import math
import random
from itertools import combinations, product

import numpy as np

from . import kernels
from .graph import MultiGraph, good_separation
from .instance import INF, Instance, Solution, evaluate, identify_terminals, lift

DEFAULT_EPS = 0.01
MAX_SPLITTER = 4000  # family size cap; larger requests are truncated


def splitter_size(a: int, b: int, eps: float) -> int:
    if a == 0 or b == 0:
        return 1
    p = a / (a + b)
    hit = p**a * (1 - p) ** b
    if hit >= 1:
        return 1
    return max(1, math.ceil(math.log(eps) / math.log1p(-hit)))


def edge_splitter(E, a: int, b: int, eps: float = DEFAULT_EPS, seed: int = 0,
                  max_size: int = MAX_SPLITTER) -> list[frozenset]:
    """Random blue sets that contain any given A (|A|<=a) and avoid B (|B|<=b) w.h.p."""
    E = sorted(E)
    if a == 0:
        return [frozenset()]
    if b == 0:
        return [frozenset(E)]
    rng = np.random.default_rng(seed)
    n = min(splitter_size(a, b, eps), max_size)
    p = a / (a + b)
    draws = rng.random((n, len(E))) < p
    return [frozenset(e for e, hit in zip(E, row) if hit) for row in draws]


# -- assignment over a fixed partition ------------------------------------------------


def _label_parts(inst: Instance, g: MultiGraph, part_of: dict[int, int], cut: list[int],
                 k: int):
    """Best labelling constant on each part; only ``cut`` edges may cross.

    Returns (cost, live labelling) or None when a part holds two labels.
    """
    domain = inst.labels
    lidx = {l: i for i, l in enumerate(domain)}
    parts = sorted(set(part_of.values()))
    pidx = {p: i for i, p in enumerate(parts)}
    fixed = np.full(len(parts), -1, dtype=np.int64)
    for t, l in g.terminals.items():
        i = pidx[part_of[t]]
        if fixed[i] >= 0 and fixed[i] != lidx[l]:
            return None
        fixed[i] = lidx[l]
    eu, ev = [], []
    for e in cut:
        a, b = g.endpoints(e)
        pa, pb = pidx[part_of[a]], pidx[part_of[b]]
        if pa != pb:
            eu.append(pa)
            ev.append(pb)
    touched = set(eu) | set(ev)
    for i in range(len(parts)):
        if fixed[i] < 0 and i not in touched:
            fixed[i] = 0
    free = np.nonzero(fixed < 0)[0]
    cost, _, lab = kernels.best_labelling(fixed, free, len(domain), inst.dist(),
                                          np.array(eu, dtype=np.int64),
                                          np.array(ev, dtype=np.int64), None, k)
    if cost < 0:
        return None
    return cost, {v: domain[int(lab[pidx[p]])] for v, p in part_of.items()}


def _components_without(g: MultiGraph, removed: set[int]) -> dict[int, int]:
    parent = {v: v for v in g.vertices()}

    def root(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e, a, b in g.edges():
        if e not in removed:
            ra, rb = root(a), root(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return {v: root(v) for v in parent}


def exhaustive_crossing(inst: Instance, g: MultiGraph, k: int):
    """Exact k-bounded optimum by enumerating crossing sets of size <= k."""
    best = None
    edges = g.edge_ids()
    for size in range(0, min(k, len(edges)) + 1):
        for X in combinations(edges, size):
            part_of = _components_without(g, set(X))
            got = _label_parts(inst, g, part_of, list(X), k)
            if got is not None and (best is None or got[0] < best[0]):
                best = got
    return best


# -- high connectivity --------------------------------------------------------------


def _blue_components(g: MultiGraph, blue: frozenset) -> dict[int, int]:
    return _components_without(g, {e for e in g.edge_ids() if e not in blue})


def _candidate(inst: Instance, g: MultiGraph, comp: dict[int, int], blue: frozenset,
               sigma: int, x: str | None, k: int):
    size: dict[int, int] = {}
    for v, c in comp.items():
        size[c] = size.get(c, 0) + 1
    small = {c for c, s in size.items() if s <= sigma}
    marked = {comp[t] for t, l in g.terminals.items() if comp[t] in small and (x is None or l != x)}
    red = [(e, a, b) for e, a, b in g.edges() if e not in blue]
    grew = True
    while grew:
        grew = False
        for _, a, b in red:
            ca, cb = comp[a], comp[b]
            if ca in marked and cb in small and cb not in marked:
                marked.add(cb)
                grew = True
            elif cb in marked and ca in small and ca not in marked:
                marked.add(ca)
                grew = True
    rest = -1  # every unmarked component collapses into one part
    part_of = {v: (c if c in marked else rest) for v, c in comp.items()}
    cut = [e for e, a, b in red if part_of[a] != part_of[b]]
    if len(cut) > k or len(set(part_of.values())) > k + 1:
        return None
    return _label_parts(inst, g, part_of, cut, k)


def solve_high_conn(inst: Instance, sigma: int, k: int, seed: int = 0, eps: float = DEFAULT_EPS,
                    g: MultiGraph | None = None):
    """Optimum on a (sigma, k)-connected graph, or ``INF``.

    Returns ``(cost, live labelling)`` on ``g`` when ``g`` is given, otherwise a
    :class:`Solution` on the instance graph.
    """
    own = g is None
    g = inst.graph if g is None else g
    if g.n <= sigma * k or k == 0:
        best = exhaustive_crossing(inst, g, k)
    else:
        best = None
        guesses = sorted(set(g.terminals.values())) + [None]
        for blue in edge_splitter(g.edge_ids(), 2 * sigma * k, k, eps, seed):
            comp = _blue_components(g, blue)
            for x in guesses:
                got = _candidate(inst, g, comp, blue, sigma, x, k)
                if got is not None and (best is None or got[0] < best[0]):
                    best = got
    if not own:
        return best
    if best is None:
        return INF
    full = lift(g, best[1])
    cost, cross = evaluate(inst, full)
    return Solution(full, cost, cross)


# -- recursive understanding ----------------------------------------------------------


class _Solver:
    def __init__(self, inst: Instance, seed: int, eps: float):
        self.inst = inst
        self.rng = random.Random(seed)
        self.seed = seed
        self.eps = eps
        self.memo: dict = {}
        self.calls = 0

    def connected(self, g: MultiGraph, k: int):
        """(cost, live labelling) for a connected graph, or None."""
        key = (g.signature(), k)
        if key in self.memo:
            return self.memo[key]
        self.calls += 1
        out = self._connected(g, k)
        if out is not None:
            # labels come back on a contracted copy; map them to g's vertices
            out = out[0], {v: out[1][out[2].find(v)] for v in g.vertices()}
        self.memo[key] = out
        return out

    def _connected(self, g: MultiGraph, k: int):
        labels = set(g.terminals.values())
        if len(labels) > k + 1:
            return None
        if len(labels) <= 1:
            lab = labels.pop() if labels else self.inst.labels[0]
            return 0, {v: lab for v in g.vertices()}, g
        D = len(self.inst.labels)
        sigma = D**k + 1
        while True:
            sep = good_separation(g, sigma, k, rng=self.rng)
            if sep is None:
                got = solve_high_conn(self.inst, sigma, k, self.rng.randrange(2**31), self.eps, g)
                return None if got is None else (*got, g)
            left, right = sep
            side = left if len(left) <= len(right) else right
            cut = g.boundary(side)
            border = sorted({x for e in cut for x in g.endpoints(e) if x in side})
            keep = self._essential(g.induced(side), border, k)
            if keep is None:
                return None
            inner = g.inside(side) - keep
            if not inner:
                got = exhaustive_crossing(self.inst, g, k)
                return None if got is None else (*got, g)
            g = g.contract(inner)

    def _essential(self, sub: MultiGraph, border: list[int], k: int) -> set[int] | None:
        """Crossing edges of optimal solutions for every border labelling and budget."""
        keep: set[int] = set()
        found = False
        for guess in product(self.inst.labels, repeat=len(border)):
            if any(sub.terminals.get(v, l) != l for v, l in zip(border, guess)):
                continue
            h = sub.copy()
            for v, l in zip(border, guess):
                h.terminals[v] = l
            groups: dict[str, list[int]] = {}
            for v, l in h.terminals.items():
                groups.setdefault(l, []).append(v)
            for grp in groups.values():
                h.merge(grp)
            for budget in range(k + 1):
                got = self.connected(h, budget)
                if got is None:
                    continue
                found = True
                lab = got[1]
                keep |= {e for e, a, b in h.edges() if lab[a] != lab[b]}
        return keep if found else None


def solve_general(inst: Instance, k: int, seed: int = 0, eps: float = DEFAULT_EPS):
    """Cheapest extension with at most ``k`` crossing edges (Monte Carlo), or ``INF``."""
    if inst.unary:
        raise ValueError("the contractions solver handles Zero Extension only (no unary costs)")
    red = identify_terminals(inst)
    g = red.graph
    solver = _Solver(red, seed, eps)
    # per component, best (cost, labelling) for every budget, then a min-plus merge
    table: dict[int, tuple[int, dict]] = {0: (0, {})}
    for comp in g.components():
        sub = g.induced(comp)
        options = {}
        for budget in range(k + 1):
            got = solver.connected(sub, budget)
            if got is not None:
                crosses = sum(1 for _, a, b in sub.edges() if got[1][a] != got[1][b])
                c = crosses
                if c not in options or got[0] < options[c][0]:
                    options[c] = got
        nxt: dict[int, tuple[int, dict]] = {}
        for used, (cost, lab) in table.items():
            for c, (cc, cl) in options.items():
                if used + c > k:
                    continue
                tot = cost + cc
                if used + c not in nxt or tot < nxt[used + c][0]:
                    nxt[used + c] = (tot, {**lab, **cl})
        table = nxt
        if not table:
            return INF
    cost, live = min(table.values(), key=lambda t: t[0])
    full = lift(g, live)
    c, cross = evaluate(inst, full)
    assert c == cost and len(cross) <= k, "contractions solver produced an inconsistent labelling"
    return Solution(full, c, cross, {"branches": solver.calls})

"""Exhaustive reference solvers.

Labellings are enumerated with free vertices in id order (first vertex most
significant) and labels in domain order, so ties resolve to the
lexicographically first labelling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .instance import INF, Instance, Solution, lift, members_of, make_solution

DEFAULT_CAP = 10**7


class OracleRefused(RuntimeError):
    pass


@dataclass
class _Problem:
    slots: list[int]
    fixed: np.ndarray
    free: np.ndarray
    dist: np.ndarray
    eu: np.ndarray
    ev: np.ndarray
    unary: np.ndarray
    domain: tuple[str, ...]


def _setup(inst: Instance, domain: Sequence[str] | None, cap: int) -> _Problem:
    g = inst.graph
    domain = tuple(inst.labels if domain is None else domain)
    lidx = {l: i for i, l in enumerate(domain)}
    slots = g.vertices()
    sidx = {v: i for i, v in enumerate(slots)}
    fixed = np.full(len(slots), -1, dtype=np.int64)
    for v, l in g.terminals.items():
        if l not in lidx:
            raise OracleRefused(f"terminal label {l!r} not in the domain")
        fixed[sidx[v]] = lidx[l]
    free = np.nonzero(fixed < 0)[0]
    if len(domain) ** len(free) > cap:
        raise OracleRefused(f"{len(domain)}^{len(free)} labellings exceed the cap {cap}")
    edges = g.edges()
    eu = np.array([sidx[a] for _, a, _ in edges], dtype=np.int64)
    ev = np.array([sidx[b] for _, _, b in edges], dtype=np.int64)
    unary = inst.unary_table(slots, domain, members_of(g) if inst.unary else None)
    return _Problem(slots, fixed, free, inst.dist(domain), eu, ev, unary, domain)


def brute_solve(inst: Instance, domain: Sequence[str] | None = None, kmax: int | None = None,
                cap: int = DEFAULT_CAP) -> Solution | type(INF):
    """Optimal extension over ``domain`` (default: integral labels).

    With ``kmax`` only labellings with at most that many crossing edges count.
    Returns ``INF`` when none qualifies. The labelling is reported on the
    original vertices of the instance graph.
    """
    p = _setup(inst, domain, cap)
    cost, cross, lab = kernels.best_labelling(
        p.fixed, p.free, len(p.domain), p.dist, p.eu, p.ev, p.unary, -1 if kmax is None else kmax)
    if cost < 0:
        return INF
    live = {v: p.domain[int(lab[i])] for i, v in enumerate(p.slots)}
    sol = Solution(lift(inst.graph, live), cost, frozenset(), {"branches": 1})
    sol.crossing = frozenset(e for e, a, b in inst.graph.edges() if live[a] != live[b])
    return sol


def brute_k_bounded(inst: Instance, k: int, domain: Sequence[str] | None = None,
                    cap: int = DEFAULT_CAP):
    """Minimum cost over extensions with at most ``k`` crossing edges, or ``INF``."""
    sol = brute_solve(inst, domain, kmax=k, cap=cap)
    return INF if sol is INF else sol.cost


def all_optima(inst: Instance, domain: Sequence[str] | None = None, kmax: int | None = None,
               cap: int = DEFAULT_CAP) -> tuple[int, list[dict[int, str]]]:
    """Optimal cost and every optimal labelling of the live vertices."""
    p = _setup(inst, domain, cap)
    costs, crosses = kernels.all_labelling_costs(
        p.fixed, p.free, len(p.domain), p.dist, p.eu, p.ev, p.unary)
    if kmax is not None:
        costs = np.where(crosses <= kmax, costs, np.iinfo(np.int64).max)
    best = int(costs.min())
    if best == np.iinfo(np.int64).max:
        return -1, []
    out = []
    for idx in np.nonzero(costs == best)[0]:
        lab = kernels.decode_labelling(int(idx), p.fixed, p.free, len(p.domain))
        out.append({v: p.domain[int(lab[i])] for i, v in enumerate(p.slots)})
    return best, out


@dataclass
class OptProjection:
    cost: int
    optima: list[dict[int, str]]
    D: dict[int, set[str]]
    R: dict[tuple[int, int], set[tuple[str, str]]]
    integral: tuple[str, ...]

    def D_I(self, v: int) -> set[str]:
        return self.D[v] & set(self.integral)

    def R_I(self, u: int, v: int) -> set[tuple[str, str]]:
        keep = set(self.integral)
        return {(a, b) for a, b in self.R[u, v] if a in keep and b in keep}


def projections(inst: Instance, domain: Sequence[str] | None = None,
                cap: int = DEFAULT_CAP) -> OptProjection:
    """Per-vertex value sets and per-pair relations over all optima."""
    cost, optima = all_optima(inst, domain, cap=cap)
    verts = inst.graph.vertices()
    D = {v: {lab[v] for lab in optima} for v in verts}
    R = {}
    for u in verts:
        for v in verts:
            R[u, v] = {(lab[u], lab[v]) for lab in optima}
    return OptProjection(cost, optima, D, R, tuple(inst.labels))

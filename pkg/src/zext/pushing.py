"""Branching solver for metric costs, parameterized by crossing edges.

Stage 1 settles the crossing edges that touch terminals, stage 2 the rest,
and a final exhaustive pass labels the (at most 2k) surviving vertices.
Branching order is fixed: lowest edge id first, contraction before marking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .graph import FlowState, MultiGraph, furthest_region, reach
from .instance import INF, Instance, Solution, evaluate, identify_terminals, lift, members_of
from .metric import MetricTree, triangle_witness


class NotMetric(ValueError):
    pass


@dataclass
class BranchState:
    graph: MultiGraph
    marked: frozenset
    p2: int  # lower bound on crossings, doubled
    k: int

    @property
    def p(self) -> float:
        return self.p2 / 2


@dataclass
class SearchStats:
    nodes: int = 0
    outputs: int = 0
    pruned: int = 0


def _require_metric(inst: Instance) -> None:
    if inst.unary:
        raise NotMetric("the pushing solver handles Zero Extension only (no unary costs)")
    if isinstance(inst.cost, MetricTree):
        return
    w = triangle_witness(inst.cost)
    if w is not None:
        raise NotMetric(f"cost violates the triangle inequality at {w}")


# -- pushing ---------------------------------------------------------------------


def push(inst: Instance, lab: Mapping[int, str], label: str) -> dict[int, str]:
    """Grow the class of ``label`` to its furthest min cut against other terminals."""
    if label not in inst.labels:
        raise ValueError(f"unknown label {label!r}")
    g = inst.graph
    src = {v for v in g.vertices() if lab[v] == label}
    out = dict(lab)
    if not src:
        return out
    sinks = {t for t, l in g.terminals.items() if l != label}
    _, region, _ = furthest_region(g, src, sinks)
    for v in region:
        out[v] = label
    return out


def _merge_into(g: MultiGraph, t: int, group) -> tuple[MultiGraph, int]:
    g = g.copy()
    keep = g.merge(set(group) | {t})
    return g, keep


def reduce_terminals(inst: Instance) -> Instance:
    """Identify same-label terminals, then contract each terminal's furthest isolating region."""
    inst = identify_terminals(inst)
    return inst.with_graph(reduce_graph(inst.graph))


def reduce_graph(g: MultiGraph) -> MultiGraph:
    """Contract each terminal's furthest isolating region into it, to a fixpoint."""
    changed = True
    while changed:
        changed = False
        S = set(g.terminals)
        for t in sorted(S):
            _, region, _ = furthest_region(g, {t}, S - {t})
            if len(region) > 1:
                g, _ = _merge_into(g, t, region)
                changed = True
    return g


# -- stage helpers ------------------------------------------------------------------


def _parallels(g: MultiGraph, a: int, b: int) -> set[int]:
    return {e for e in g.incident(a) if g.other(e, a) == b}


def _far_marked(g: MultiGraph, marked, t: int) -> set[int]:
    return {g.other(e, t) for e in g.incident(t) if e in marked}


def _close_marks(g: MultiGraph, marked) -> frozenset:
    """Mark terminal-terminal edges and parallels of marked edges."""
    S = set(g.terminals)
    out = set(e for e in marked if g.has_edge(e))
    for e, a, b in g.edges():
        if a in S and b in S:
            out.add(e)
    for e in list(out):
        out |= _parallels(g, *g.endpoints(e))
    return frozenset(out)


def _normalize(g: MultiGraph, marked) -> tuple[MultiGraph, frozenset]:
    """Contract each terminal's furthest region against other terminals and its marked neighbours."""
    marked = _close_marks(g, marked)
    changed = True
    while changed:
        changed = False
        S = set(g.terminals)
        for t in sorted(S):
            sinks = (S - {t}) | _far_marked(g, marked, t)
            _, region, _ = furthest_region(g, {t}, sinks)
            if len(region) > 1:
                assert not (g.inside(region) & marked), "normalization swallowed a marked edge"
                g, _ = _merge_into(g, t, region)
                marked = _close_marks(g, marked)
                changed = True
    return g, marked


def _bound2(g: MultiGraph, marked, k: int) -> int:
    """Doubled lower bound on the crossing number of any consistent labelling."""
    S = set(g.terminals)
    if not S:
        return 2 * len(marked)
    rest = g.remove_edges(marked)
    whole, without = 0, 2 * len(marked)
    for t in sorted(S):
        sinks = (S - {t}) | _far_marked(g, marked, t)
        if not sinks:
            continue
        whole += FlowState(g, {t}, sinks, cap_limit=2 * k + 1).value
        without += FlowState(rest, {t}, sinks, cap_limit=2 * k + 1).value
        if max(whole, without) > 2 * k:
            break
    return max(whole, without)


def stage1(inst: Instance, k: int, stats: SearchStats | None = None) -> list[BranchState]:
    """Branch until every terminal-incident edge is marked.

    ``inst`` should already be reduced (see :func:`reduce_terminals`).
    """
    stats = stats if stats is not None else SearchStats()
    outs: list[BranchState] = []
    stack = [(inst.graph, frozenset())]
    while stack:
        g, marked = stack.pop()
        stats.nodes += 1
        g, marked = _normalize(g, marked)
        p2 = _bound2(g, marked, k)
        if p2 > 2 * k:
            stats.pruned += 1
            continue
        S = set(g.terminals)
        pick = None
        for t in sorted(S):
            for e in g.incident(t):
                if e not in marked and (pick is None or e < pick[0]):
                    pick = (e, t)
        if pick is None:
            outs.append(BranchState(g, marked, p2, k))
            continue
        e, t = pick
        v = g.other(e, t)
        g_con, _ = _merge_into(g, t, {v})
        # contraction branch is explored first
        stack.append((g, marked | _parallels(g, t, v)))
        stack.append((g_con, marked))
    stats.outputs += len(outs)
    return outs


def stage2(state: BranchState, k: int, stats: SearchStats | None = None) -> list[BranchState]:
    """Branch around non-terminal seeds until every remaining edge is marked."""
    stats = stats if stats is not None else SearchStats()
    outs: list[BranchState] = []
    S0 = set(state.graph.terminals)
    stack = [(state.graph, state.marked, None)]
    while stack:
        g, marked, v = stack.pop()
        stats.nodes += 1
        if len(marked) > k:
            stats.pruned += 1
            continue
        S = set(g.terminals)
        if v is None or all(e in marked for e in g.incident(v)):
            v = next((x for x in g.vertices() if x not in S
                      and any(e not in marked for e in g.incident(x))), None)
            if v is None:
                outs.append(BranchState(g, marked, state.p2, k))
                continue
        value, region, aborted = furthest_region(g, {v}, S, cap_limit=k)
        if aborted or value > k:
            stats.pruned += 1
            continue
        if g.inside(region) & marked:
            stats.pruned += 1
            continue
        if len(region) > 1:
            g, v = _merge_into(g, v, region)
        free = [e for e in g.incident(v) if e not in marked]
        if not free:
            stack.append((g, marked, None))
            continue
        e = free[0]
        w = g.other(e, v)
        g_con, keep = _merge_into(g, v, {w})
        stack.append((g, marked | _parallels(g, v, w), v))
        stack.append((g_con, marked, keep))
    assert S0 == set(state.graph.terminals)
    stats.outputs += len(outs)
    return outs


def assign(state: BranchState, inst: Instance, k: int | None = None):
    """Cheapest labelling of the contracted graph, lifted to the original vertices."""
    g = state.graph
    domain = inst.labels
    lidx = {l: i for i, l in enumerate(domain)}
    slots = g.vertices()
    sidx = {v: i for i, v in enumerate(slots)}
    fixed = np.full(len(slots), -1, dtype=np.int64)
    for v, l in g.terminals.items():
        fixed[sidx[v]] = lidx[l]
    # free vertices without edges take the first label at no cost
    touched = {x for _, a, b in g.edges() for x in (a, b)}
    for i, v in enumerate(slots):
        if fixed[i] < 0 and v not in touched:
            fixed[i] = 0
    free = np.nonzero(fixed < 0)[0]
    edges = g.edges()
    eu = np.array([sidx[a] for _, a, _ in edges], dtype=np.int64)
    ev = np.array([sidx[b] for _, _, b in edges], dtype=np.int64)
    cost, _, lab = kernels.best_labelling(fixed, free, len(domain), inst.dist(domain), eu, ev,
                                          None, -1 if k is None else k)
    if cost < 0:
        return INF
    live = {v: domain[int(lab[i])] for i, v in enumerate(slots)}
    full = lift(g, live)
    c, cross = evaluate(inst, full)
    return Solution(full, c, cross, {"leaves": len(domain) ** len(free)})


def solve_metric(inst: Instance, k: int) -> Solution | type(INF):
    """Cheapest extension with at most ``k`` crossing edges, or ``INF``."""
    _require_metric(inst)
    red = reduce_terminals(inst)
    s1, s2 = SearchStats(), SearchStats()
    S = set(red.graph.terminals)
    p0 = _bound2(red.graph, _close_marks(red.graph, ()), k)
    best = INF
    leaves = 0
    for st in stage1(red, k, s1):
        for fin in stage2(st, k, s2):
            sol = assign(fin, inst, k)
            if sol is INF:
                continue
            leaves += 1
            if best is INF or sol.cost < best.cost:
                best = sol
    stats = {"stage1_nodes": s1.nodes, "stage1_outputs": s1.outputs,
             "stage2_nodes": s2.nodes, "stage2_outputs": s2.outputs,
             "assign_leaves": leaves, "p0": p0 / 2, "terminals": len(S)}
    if best is INF:
        return INF
    cost, cross = evaluate(inst, best.labelling)
    assert cost == best.cost and len(cross) <= k, "pushing solver produced an invalid labelling"
    best.stats = stats | {"branches": s1.nodes + s2.nodes}
    return best

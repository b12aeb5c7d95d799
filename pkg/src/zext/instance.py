"""Instances, labellings and their cost."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .graph import MultiGraph
from .metric import CostMatrix, MetricTree, extend_unary


class InstanceError(ValueError):
    pass


@functools.total_ordering
class _Infinity:
    """Cost of an infeasible instance. Compares above every number."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("zext-inf")

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


@dataclass
class Instance:
    """Graph with a partial labelling, a cost and budgets."""

    graph: MultiGraph
    cost: CostMatrix | MetricTree
    unary: dict[int, dict[str, int]] | None = None
    q: int | None = None
    k: int | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        dom = set(self.labels)
        for v, l in self.graph.terminals.items():
            if l not in dom:
                raise InstanceError(f"terminal {v} has label {l!r} outside the label set")
        if self.unary:
            allowed = set(self.relaxed_labels)
            for v, row in self.unary.items():
                if not (0 <= v < self.graph.n_original):
                    raise InstanceError(f"unary cost for unknown vertex {v}")
                for l, c in row.items():
                    if l not in allowed:
                        raise InstanceError(f"unary cost for unknown label {l!r}")
                    if c < 0:
                        raise InstanceError(f"negative unary cost at ({v}, {l})")

    @property
    def is_tree(self) -> bool:
        return isinstance(self.cost, MetricTree)

    @property
    def tree(self) -> MetricTree:
        if not self.is_tree:
            raise InstanceError("instance does not carry a tree metric")
        return self.cost

    @property
    def labels(self) -> tuple[str, ...]:
        """Integral label domain."""
        return self.cost.labels

    @property
    def relaxed_labels(self) -> tuple[str, ...]:
        return self.cost.nodes if self.is_tree else self.cost.labels

    @property
    def terminals(self) -> dict[int, str]:
        return self.graph.terminals

    def with_graph(self, g: MultiGraph) -> "Instance":
        return replace(self, graph=g)

    def dist(self, domain: Sequence[str] | None = None) -> np.ndarray:
        domain = self.labels if domain is None else tuple(domain)
        if self.is_tree:
            idx = [self.tree.index[l] for l in domain]
            return self.tree.dist[np.ix_(idx, idx)]
        return self.cost.restrict(domain).mat

    def mu(self, a: str, b: str) -> int:
        return self.cost.d(a, b) if self.is_tree else self.cost.mu(a, b)

    @functools.cached_property
    def _unary_ext(self) -> dict[int, dict[str, int]]:
        """Unary costs over the relaxed domain (interpolated for trees)."""
        if not self.unary:
            return {}
        if not self.is_tree:
            return {v: dict(r) for v, r in self.unary.items()}
        out = {}
        for v, row in self.unary.items():
            if set(row) >= set(self.tree.nodes):
                out[v] = dict(row)
            else:
                out[v] = extend_unary({l: row.get(l, 0) for l in self.tree.labels}, self.tree)
        return out

    def unary_cost(self, v: int, label: str) -> int:
        row = self._unary_ext.get(v)
        if row is None:
            return 0
        if label in row:
            return row[label]
        return 0

    def unary_extended(self) -> dict[int, dict[str, int]]:
        return self._unary_ext

    def unary_table(self, slots: Sequence[int], domain: Sequence[str],
                    members: Mapping[int, Sequence[int]] | None = None) -> np.ndarray:
        """``len(slots) x len(domain)`` unary costs; merged vertices sum their members."""
        t = np.zeros((len(slots), len(domain)), dtype=np.int64)
        if not self.unary:
            return t
        for i, v in enumerate(slots):
            for o in (members[v] if members else (v,)):
                for j, l in enumerate(domain):
                    t[i, j] += self.unary_cost(o, l)
        return t


@dataclass
class Solution:
    labelling: dict[int, str]
    cost: int
    crossing: frozenset
    stats: dict = field(default_factory=dict)

    @property
    def crossings(self) -> int:
        return len(self.crossing)


def members_of(g: MultiGraph) -> dict[int, list[int]]:
    """Original vertices merged into each live vertex."""
    out: dict[int, list[int]] = {v: [] for v in g.vertices()}
    for o in range(g.n_original):
        r = g.find(o)
        if r in out:
            out[r].append(o)
    return out


def lift(g: MultiGraph, lab: Mapping[int, str]) -> dict[int, str]:
    """Labelling of original vertices from one on live vertices."""
    return {o: lab[g.find(o)] for o in range(g.n_original) if g.find(o) in lab}


def evaluate(inst: Instance, lab: Mapping[int, str], original: MultiGraph | None = None
             ) -> tuple[int, frozenset]:
    """Cost and crossing set of a labelling of ``original`` (default: the instance graph).

    Raises if a terminal is relabelled or a vertex is unlabelled.
    """
    g = inst.graph if original is None else original
    for v, l in g.terminals.items():
        if lab.get(v) != l:
            raise InstanceError(f"labelling moves terminal {v} off {l!r}")
    cost = 0
    cross = []
    for e, a, b in g.edges():
        la, lb = lab[a], lab[b]
        if la != lb:
            cross.append(e)
            cost += inst.mu(la, lb)
    if inst.unary:
        for v in g.vertices():
            cost += inst.unary_cost(v, lab[v])
    return cost, frozenset(cross)


def make_solution(inst: Instance, lab: Mapping[int, str], **stats) -> Solution:
    cost, cross = evaluate(inst, lab)
    return Solution(dict(lab), cost, cross, dict(stats))


def identify_terminals(inst: Instance) -> Instance:
    """Merge all terminals that share a label."""
    g = inst.graph.copy()
    by_label: dict[str, list[int]] = {}
    for v, l in sorted(g.terminals.items()):
        by_label.setdefault(l, []).append(v)
    for group in by_label.values():
        if len(group) > 1:
            g.merge(group)
    return inst.with_graph(g)

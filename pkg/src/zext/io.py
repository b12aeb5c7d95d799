"""JSON instance documents.

One file holds one instance::

    {
      "name": "star-a",
      "vertices": 4,
      "edges": [[3, 0], [3, 1], [3, 2]],
      "terminals": {"0": "x", "1": "y", "2": "z"},
      "metric": {"tree": {"nodes": ["c", "x", "y", "z"],
                          "edges": [["c", "x"], ["c", "y"], ["c", "z"]],
                          "labels": ["x", "y", "z"]}},
      "q": 4,
      "k": 2
    }

A matrix metric is ``{"class": "metric", "matrix": {"labels": [...], "rows": [[...]]}}``
where ``class`` is one of ``cost``, ``metric``, ``tree-metric``. Optional keys:
``unary`` (vertex -> label -> cost), ``q``, ``k``, ``name`` and ``meta``.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .graph import MultiGraph
from .instance import Instance, InstanceError, members_of
from .metric import CostError, CostMatrix, MetricTree, ReconstructionError, validate_cost

MATRIX_CLASSES = ("cost", "metric", "tree-metric")


class FormatError(ValueError):
    def __init__(self, msg: str, where: str = ""):
        super().__init__(f"{where}: {msg}" if where else msg)
        self.where = where


def _int(x, where: str, lo: int | None = 0) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise FormatError(f"expected an integer, got {x!r}", where)
    if lo is not None and x < lo:
        raise FormatError(f"expected an integer >= {lo}, got {x}", where)
    return x


def _vertex(key, n: int, where: str) -> int:
    try:
        v = int(key)
    except (TypeError, ValueError):
        raise FormatError(f"bad vertex id {key!r}", where) from None
    if not 0 <= v < n:
        raise FormatError(f"vertex {v} not declared (0..{n - 1})", where)
    return v


def _parse_metric(doc: Any):
    where = "metric"
    if not isinstance(doc, dict):
        raise FormatError("expected an object", where)
    if "tree" in doc:
        t = doc["tree"]
        nodes = [str(x) for x in t.get("nodes", [])]
        known = set(nodes)
        edges = []
        for i, e in enumerate(t.get("edges", [])):
            if not (isinstance(e, list) and len(e) == 2):
                raise FormatError("tree edge must be a pair", f"{where}.tree.edges[{i}]")
            for x in e:
                if x not in known:
                    raise FormatError(f"undeclared tree node {x!r}", f"{where}.tree.edges[{i}]")
            edges.append((e[0], e[1]))
        labels = t.get("labels", nodes)
        for i, l in enumerate(labels):
            if l not in known:
                raise FormatError(f"label {l!r} is not a tree node", f"{where}.tree.labels[{i}]")
        try:
            return MetricTree.from_names(nodes, edges, labels)
        except ReconstructionError as exc:
            raise FormatError(str(exc), f"{where}.tree") from None
    if "matrix" in doc:
        m = doc["matrix"]
        cls = doc.get("class", "metric")
        if cls not in MATRIX_CLASSES:
            raise FormatError(f"unknown class {cls!r}; expected one of {MATRIX_CLASSES}",
                              f"{where}.class")
        labels = [str(x) for x in m.get("labels", [])]
        if len(set(labels)) != len(labels):
            raise FormatError("duplicate labels", f"{where}.matrix.labels")
        rows = m.get("rows", [])
        if len(rows) != len(labels) or any(len(r) != len(labels) for r in rows):
            raise FormatError(f"need a {len(labels)}x{len(labels)} matrix", f"{where}.matrix.rows")
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                _int(x, f"{where}.matrix.rows[{i}][{j}]")
        cm = CostMatrix(tuple(labels), np.array(rows, dtype=np.int64).reshape(len(labels), -1))
        try:
            kind = validate_cost(cm)
        except CostError as exc:
            raise FormatError(str(exc), f"{where}.matrix") from None
        if cls == "metric" and not kind.is_metric:
            raise FormatError(f"triangle inequality fails at {kind.witness}", f"{where}.matrix")
        if cls == "tree-metric" and kind.kind not in ("tree-metric", "induced-tree-metric-candidate"):
            raise FormatError(f"not a tree metric (witness {kind.witness})", f"{where}.matrix")
        return cm
    raise FormatError("expected a 'tree' or 'matrix' entry", where)


def instance_from_dict(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise FormatError("top level must be an object")
    n = _int(doc.get("vertices"), "vertices")
    edges = []
    for i, e in enumerate(doc.get("edges", [])):
        if not (isinstance(e, list) and len(e) == 2):
            raise FormatError("edge must be a pair", f"edges[{i}]")
        edges.append((_vertex(e[0], n, f"edges[{i}]"), _vertex(e[1], n, f"edges[{i}]")))
    cost = _parse_metric(doc.get("metric"))
    known = set(cost.labels)
    terminals = {}
    for key, l in doc.get("terminals", {}).items():
        v = _vertex(key, n, f"terminals.{key}")
        if l not in known:
            raise FormatError(f"undeclared label {l!r}", f"terminals.{key}")
        terminals[v] = l
    unary = None
    if doc.get("unary"):
        allowed = set(cost.nodes if isinstance(cost, MetricTree) else cost.labels)
        unary = {}
        for key, row in doc["unary"].items():
            v = _vertex(key, n, f"unary.{key}")
            unary[v] = {}
            for l, c in row.items():
                if l not in allowed:
                    raise FormatError(f"undeclared label {l!r}", f"unary.{key}")
                unary[v][l] = _int(c, f"unary.{key}.{l}")
    q = None if doc.get("q") is None else _int(doc["q"], "q")
    k = None if doc.get("k") is None else _int(doc["k"], "k")
    try:
        return Instance(MultiGraph(n, edges, terminals), cost, unary=unary, q=q, k=k,
                        name=str(doc.get("name", "")), meta=dict(doc.get("meta", {})))
    except InstanceError as exc:
        raise FormatError(str(exc)) from None


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return instance_from_dict(doc)


def _metric_dict(cost) -> dict:
    if isinstance(cost, MetricTree):
        return {"tree": {"nodes": list(cost.nodes),
                         "edges": [[cost.nodes[a], cost.nodes[b]] for a, b in cost.edges],
                         "labels": list(cost.labels)}}
    kind = validate_cost(cost)
    cls = "metric" if kind.is_metric else "cost"
    return {"class": cls, "matrix": {"labels": list(cost.labels), "rows": cost.mat.tolist()}}


def instance_to_dict(inst: Instance) -> dict:
    """Plain document; contracted graphs are renumbered onto their live vertices."""
    g = inst.graph
    meta = dict(inst.meta)
    if g.n != g.n_original:
        live = g.vertices()
        new = {v: i for i, v in enumerate(live)}
        mem = members_of(g)
        meta["merged_from"] = [mem[v] for v in live]
    else:
        new = {v: v for v in g.vertices()}
    doc: dict = {"name": inst.name, "vertices": len(new),
                 "edges": [[new[a], new[b]] for _, a, b in g.edges()],
                 "terminals": {str(new[v]): l for v, l in sorted(g.terminals.items())},
                 "metric": _metric_dict(inst.cost)}
    if inst.unary:
        rows: dict[int, dict[str, int]] = {}
        for v, row in sorted(inst.unary.items()):
            tgt = new[g.find(v)]
            acc = rows.setdefault(tgt, {})
            for l, c in row.items():
                acc[l] = acc.get(l, 0) + int(c)
        doc["unary"] = {str(v): rows[v] for v in sorted(rows)}
    if inst.q is not None:
        doc["q"] = inst.q
    if inst.k is not None:
        doc["k"] = inst.k
    if meta:
        doc["meta"] = meta
    return doc


def _dump(x, pad: str = "") -> str:
    """JSON with objects spread over lines and flat lists kept on one line."""
    inner = pad + "  "
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_dump(v, inner)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(x, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple)) for v in x):
            return "[" + ", ".join(json.dumps(v, default=_jsonable) for v in x) + "]"
        if all(isinstance(v, (list, tuple)) and len(v) <= 4 for v in x):
            return "[" + ", ".join(_dump(v, inner) for v in x) + "]"
        return "[\n" + ",\n".join(inner + _dump(v, inner) for v in x) + "\n" + pad + "]"
    return json.dumps(x, default=_jsonable)


def write_instance(inst: Instance) -> str:
    return _dump(instance_to_dict(inst)) + "\n"


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (set, frozenset, tuple)):
        return sorted(x) if isinstance(x, (set, frozenset)) else list(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def load(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def save(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_instance(inst))

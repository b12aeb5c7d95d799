"""The three named regression instances."""

from __future__ import annotations

import numpy as np

from .graph import MultiGraph
from .instance import Instance
from .metric import CostMatrix, MetricTree

STAR_TREE = MetricTree.from_names(["c", "x", "y", "z"], [("c", "x"), ("c", "y"), ("c", "z")],
                                  ["x", "y", "z"])
PATH_TREE = MetricTree.from_names(["x", "c", "y"], [("x", "c"), ("c", "y")], ["x", "y"])


def star_a(tree: MetricTree = STAR_TREE, q: int | None = 4) -> Instance:
    """Terminals tx, ty, tz (0, 1, 2) all adjacent to a free center u (3)."""
    g = MultiGraph(4, [(3, 0), (3, 1), (3, 2)], {0: "x", 1: "y", 2: "z"})
    return Instance(g, tree, q=q, k=2, name="star-a")


def path_b(tree: MetricTree = PATH_TREE, q: int | None = 2) -> Instance:
    """Path tx - a - b - ty, vertices 0..3."""
    g = MultiGraph(4, [(0, 1), (1, 2), (2, 3)], {0: "x", 3: "y"})
    return Instance(g, tree, q=q, k=1, name="path-b")


def triangle_c() -> Instance:
    """Three mutually adjacent terminals under the uniform cost 2."""
    mat = np.full((3, 3), 2, dtype=np.int64) - 2 * np.eye(3, dtype=np.int64)
    g = MultiGraph(3, [(0, 1), (1, 2), (0, 2)], {0: "x", 1: "y", 2: "z"})
    return Instance(g, CostMatrix(("x", "y", "z"), mat), q=6, k=3, name="triangle-c")

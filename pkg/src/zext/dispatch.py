"""Algorithm selection and uniform solver invocation."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import contractions, pushing, relaxation
from .instance import INF, Instance, Solution, evaluate
from .metric import MetricTree, reconstruct_tree, ReconstructionError, triangle_witness, four_point_witness
from .oracle import brute_solve

ALGORITHMS = ("auto", "brute", "pushing", "contractions", "leaf-gap", "tree-gap", "ml-gap")


class UsageError(ValueError):
    pass


def is_metric(inst: Instance) -> bool:
    if inst.is_tree:
        return True
    return triangle_witness(inst.cost) is None


def as_tree(inst: Instance) -> Instance | None:
    """The instance over a reconstructed tree, when its matrix is a tree metric."""
    if inst.is_tree:
        return inst
    if not is_metric(inst) or four_point_witness(inst.cost) is not None:
        return None
    try:
        tree = reconstruct_tree(inst.cost)
    except ReconstructionError:
        return None
    return Instance(inst.graph, tree, unary=inst.unary, q=inst.q, k=inst.k, name=inst.name,
                    meta=inst.meta)


def choose(inst: Instance) -> str:
    t = as_tree(inst)
    if inst.unary:
        return "ml-gap" if t is not None and inst.q is not None else "brute"
    if t is not None and inst.q is not None:
        return "leaf-gap" if t.tree.is_leaf_metric else "tree-gap"
    if inst.k is None:
        return "brute"
    return "pushing" if is_metric(inst) else "contractions"


def applicable(inst: Instance) -> list[str]:
    """Every non-brute algorithm whose preconditions hold."""
    out = []
    t = as_tree(inst)
    if inst.unary:
        if t is not None and inst.q is not None:
            out.append("ml-gap")
        return out
    if inst.k is not None:
        if is_metric(inst):
            out.append("pushing")
        out.append("contractions")
    if t is not None and inst.q is not None:
        if t.tree.is_leaf_metric:
            out.append("leaf-gap")
        out.append("tree-gap")
    return out


@dataclass
class Outcome:
    algorithm: str
    solution: Solution | None  # None means no solution within the budget
    verified: bool
    stats: dict = field(default_factory=dict)

    @property
    def cost(self):
        return INF if self.solution is None else self.solution.cost


def run(inst: Instance, algorithm: str = "auto", seed: int = 0, eps: float = contractions.DEFAULT_EPS
        ) -> Outcome:
    if algorithm not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {algorithm!r}")
    if algorithm == "auto":
        algorithm = choose(inst)
    stats: dict = {}
    if algorithm == "brute":
        sol = brute_solve(inst, kmax=inst.k)
    elif algorithm in ("pushing", "contractions"):
        if inst.k is None:
            raise UsageError(f"{algorithm} needs a crossing budget k")
        if inst.unary:
            raise UsageError(f"{algorithm} handles Zero Extension only")
        if algorithm == "pushing":
            if not is_metric(inst):
                raise UsageError("pushing needs a metric")
            sol = pushing.solve_metric(inst, inst.k)
        else:
            sol = contractions.solve_general(inst, inst.k, seed=seed, eps=eps)
    else:
        t = as_tree(inst)
        if t is None:
            raise UsageError(f"{algorithm} needs a tree metric")
        if inst.q is None:
            raise UsageError(f"{algorithm} needs a cost budget q")
        if algorithm == "leaf-gap":
            if not t.tree.is_leaf_metric:
                raise UsageError("leaf-gap needs a leaf metric (labels = tree leaves)")
            sol = relaxation.solve_leaf_gap(t, stats)
        elif algorithm == "tree-gap":
            sol = relaxation.solve_tree_gap(t, stats)
        else:
            sol = relaxation.solve_ml_gap(t, stats)
    if sol is INF:
        return Outcome(algorithm, None, True, stats)
    cost, cross = evaluate(inst, sol.labelling)
    ok = cost == sol.cost and cross == sol.crossing
    return Outcome(algorithm, sol, ok, dict(sol.stats))

"""Zero Extension and Metric Labelling: exact, parameterized and kernelization algorithms."""

from .graph import INF_CAP, FlowState, GraphError, MultiGraph, furthest_region, max_flow_unit
from .instance import INF, Instance, InstanceError, Solution, evaluate
from .metric import (CostError, CostMatrix, MetricTree, NoExtension, ReconstructionError,
                     reconstruct_tree, validate_cost)
from .oracle import brute_k_bounded, brute_solve
from .pushing import solve_metric
from .contractions import solve_general
from .relaxation import (build_networks, relaxed_value, relaxed_value_ml, solve_leaf_gap,
                         solve_ml_gap, solve_tree_gap)
from .sparsifier import kernelize, sparsify
from .io import load, parse_instance, save, write_instance

__version__ = "0.1.0"

__all__ = [
    "INF", "INF_CAP", "CostError", "CostMatrix", "FlowState", "GraphError", "Instance",
    "InstanceError", "MetricTree", "MultiGraph", "NoExtension", "ReconstructionError", "Solution",
    "brute_k_bounded", "brute_solve", "build_networks", "evaluate", "furthest_region", "kernelize",
    "load", "max_flow_unit", "parse_instance", "reconstruct_tree", "relaxed_value",
    "relaxed_value_ml", "save", "solve_general", "solve_leaf_gap", "solve_metric", "solve_ml_gap",
    "solve_tree_gap", "sparsify", "validate_cost", "write_instance",
]

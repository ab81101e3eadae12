"""Wildfire suppression-resource interdiction: exact LBBD, greedy rolling horizon and a direct MIP."""

from .firedyn import FireDynamics, InterdictionPlan, PlanError, brute_force, evaluate, objective
from .instance import GridSpec, Instance, InstanceError, generate_grid, generate_large, load, preprocess, preset, save
from .lbbd import BendersCut, CutStats, SolveReport, greedy, solve_lbbd
from .netgraph import Network, ShortestPathTree, extract_path, shortest_path_tree, super_source_reduce

__all__ = [
    "BendersCut", "CutStats", "FireDynamics", "GridSpec", "Instance", "InstanceError", "InterdictionPlan",
    "Network", "PlanError", "ShortestPathTree", "SolveReport", "brute_force", "evaluate", "extract_path",
    "generate_grid", "generate_large", "greedy", "load", "objective", "preprocess", "preset", "save",
    "shortest_path_tree", "solve_lbbd", "super_source_reduce",
]

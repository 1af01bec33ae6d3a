"""Computational components of the tree-expansion laboratory."""

from .tree_enumerator import catalan, enumerate_forests, enumerate_trees, forest_count
from .spectral_ops import heat_propagate, leray_project, random_divfree, taylor_green
from .interaction import apply_W, vertex_bilinear
from .hierarchy import duhamel_remainder_direct, duhamel_term_direct
from .reference_solver import solve, solve_etd, solve_picard
from .tree_expansion import TreeEvaluator, solution_series, tree_sum, tree_term
from .frequency_kernel import error_kernel_eval_onemode, kernel_eval_onemode

__all__ = [
    "catalan",
    "enumerate_forests",
    "enumerate_trees",
    "forest_count",
    "heat_propagate",
    "leray_project",
    "random_divfree",
    "taylor_green",
    "apply_W",
    "vertex_bilinear",
    "duhamel_remainder_direct",
    "duhamel_term_direct",
    "solve",
    "solve_etd",
    "solve_picard",
    "TreeEvaluator",
    "solution_series",
    "tree_sum",
    "tree_term",
    "error_kernel_eval_onemode",
    "kernel_eval_onemode",
]

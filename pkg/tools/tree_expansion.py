"""
Time-domain evaluation of tree collision terms and the solution series.

A leaf carries the heat flow of its initial field and a vertex carries

    F(vertex, t) = int_0^t exp((t - s) Laplacian) B(F(marked, s), F(unmarked, s)) ds

with B the collision vertex. Subtrees are evaluated as shape sets: every
quadrature node of a level evaluates the union of the daughter shapes once,
so trees sharing subtrees share the work.
"""

import threading
import time
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import settings
from models.errors import (
    CapExceededError,
    DegenerateFitError,
    InvalidParameterError,
    SmallTimeViolation,
)
from models.field_models import SpectralVectorField
from models.report_models import ProbeResult, SeriesReport
from models.solver_models import SolverConfig, Trajectory
from models.tensor_models import SimplexQuadrature
from models.tree_models import MARKED, EdgeRef, MarkedBinaryTree
from tools.interaction import vertex_bilinear
from tools.reference_solver import solve_etd, solve_picard
from tools.spectral_ops import heat_propagate, l2_norm, rescale, sobolev_norm
from tools.tree_enumerator import (
    as_forest,
    enumerate_trees,
    leaf_index,
    maximal_vertices,
    surgery_remove_maximal_vertex,
)
from utils.logger import setup_logger
from utils.numerics import bounded_map, pairwise_sum
from utils.validators import validate_integer, validate_nonnegative, validate_positive

logger = setup_logger(__name__)

# shape key: canonical string, or (canonical string, first leaf index) for per-leaf data
ShapeKey = Hashable


def default_quadrature() -> SimplexQuadrature:
    return SimplexQuadrature("gauss_legendre", settings.QUAD_NODES, settings.QUAD_REFINED_NODES)


class SubtreeCache:
    """Thread-safe insert-or-get store of subtree values at fixed quadrature nodes."""

    def __init__(self):
        self._data: Dict[tuple, SpectralVectorField] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: tuple) -> Optional[SpectralVectorField]:
        with self._lock:
            value = self._data.get(key)
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def put(self, key: tuple, value: SpectralVectorField) -> SpectralVectorField:
        """Store value unless another thread got there first; return the stored one."""
        with self._lock:
            return self._data.setdefault(key, value)

    def __len__(self) -> int:
        return len(self._data)


class TreeEvaluator:
    """
    Evaluates collision terms of marked binary trees for one initial datum.

    With ``u0`` every leaf carries exp(s Laplacian) u0. With ``leaf_fields``
    the i-th leaf in depth-first order carries exp(s Laplacian) leaf_fields[i]
    (the multilinear form used by single-mode and error-operator checks).
    """

    def __init__(
        self,
        u0: Optional[SpectralVectorField] = None,
        q: Optional[SimplexQuadrature] = None,
        leaf_fields: Optional[Sequence[SpectralVectorField]] = None,
        dealias: bool = True,
        cache: Optional[SubtreeCache] = None,
        jobs: Optional[int] = None,
        vertex_budget: Optional[int] = None,
    ):
        if (u0 is None) == (leaf_fields is None):
            raise InvalidParameterError("give exactly one of u0 and leaf_fields")
        self.u0 = u0
        self.leaf_fields = list(leaf_fields) if leaf_fields is not None else None
        if self.leaf_fields is not None:
            grids = {f.grid for f in self.leaf_fields}
            if len(grids) != 1:
                raise InvalidParameterError("leaf fields must share one grid")
        self.grid = u0.grid if u0 is not None else self.leaf_fields[0].grid
        self.q = q or default_quadrature()
        self.dealias = dealias
        self.cache = cache
        self.jobs = settings.JOBS if jobs is None else jobs
        self.vertex_budget = settings.EXPAND_VERTEX_BUDGET if vertex_budget is None else vertex_budget
        self._shapes: Dict[ShapeKey, Tuple[MarkedBinaryTree, int]] = {}
        self._source = id(u0) if u0 is not None else tuple(id(f) for f in self.leaf_fields)

    @property
    def per_leaf(self) -> bool:
        return self.leaf_fields is not None

    def key(self, tree: MarkedBinaryTree, offset: int = 0) -> ShapeKey:
        key = (tree.canonical, offset) if self.per_leaf else tree.canonical
        self._shapes.setdefault(key, (tree, offset))
        return key

    def daughters(self, key: ShapeKey) -> Tuple[ShapeKey, ShapeKey]:
        tree, offset = self._shapes[key]
        return (
            self.key(tree.marked, offset),
            self.key(tree.unmarked, offset + tree.marked.leaf_count),
        )

    def is_leaf(self, key: ShapeKey) -> bool:
        return self._shapes[key][0].is_leaf

    def leaf_value(self, key: ShapeKey, s: float) -> SpectralVectorField:
        if not self.per_leaf:
            return heat_propagate(self.u0, s)
        offset = self._shapes[key][1]
        if offset >= len(self.leaf_fields):
            raise InvalidParameterError(f"no leaf field for leaf {offset}")
        return heat_propagate(self.leaf_fields[offset], s)

    def vertex_ops(self, keys: Sequence[ShapeKey]) -> int:
        """Collision-vertex evaluations needed for a shape set at one top-level time."""
        vertices = [k for k in keys if not self.is_leaf(k)]
        if not vertices:
            return 0
        inner = sorted({d for v in vertices for d in self.daughters(v)}, key=str)
        return self.q.nodes * (len(vertices) + self.vertex_ops(inner))

    def evaluate(self, trees: Sequence[MarkedBinaryTree], t: float) -> List[SpectralVectorField]:
        """
        Collision terms of several trees at time t, in input order.

        Raises:
            CapExceededError: If a tree exceeds the vertex cap or the shape set
                exceeds the vertex-evaluation budget
        """
        validate_nonnegative(t, "t")
        for tree in trees:
            if tree.vertex_count > settings.TREE_TERM_CAP:
                raise CapExceededError(
                    f"tree with {tree.vertex_count} vertices exceeds cap {settings.TREE_TERM_CAP}"
                )
        keys = [self.key(tree) for tree in trees]
        unique = sorted(set(keys), key=str)
        ops = self.vertex_ops(unique)
        if ops > self.vertex_budget:
            raise CapExceededError(
                f"evaluation needs {ops} vertex evaluations, budget is {self.vertex_budget}"
            )
        started = time.perf_counter()
        values = self._evaluate_cached(unique, float(t), 0)
        logger.debug(
            "Evaluated %d shapes at t=%g with %d vertex evaluations in %.2fs",
            len(unique), t, ops, time.perf_counter() - started,
        )
        return [values[k] for k in keys]

    def _evaluate_cached(self, keys: Sequence[ShapeKey], s: float, depth: int) -> Dict[ShapeKey, SpectralVectorField]:
        if self.cache is None or depth > settings.SUBTREE_CACHE_DEPTH:
            return self._evaluate_set(keys, s, depth)
        tag = (self._source, s, self.q, self.dealias)
        found = {}
        missing = []
        for k in keys:
            value = self.cache.get((k,) + tag)
            if value is None:
                missing.append(k)
            else:
                found[k] = value
        if missing:
            for k, value in self._evaluate_set(missing, s, depth).items():
                found[k] = self.cache.put((k,) + tag, value)
        return found

    def _evaluate_set(self, keys: Sequence[ShapeKey], s: float, depth: int) -> Dict[ShapeKey, SpectralVectorField]:
        result = {k: self.leaf_value(k, s) for k in keys if self.is_leaf(k)}
        vertices = [k for k in keys if not self.is_leaf(k)]
        if not vertices:
            return result
        if s == 0:
            zero = SpectralVectorField.zeros(self.grid)
            result.update({v: zero for v in vertices})
            return result
        nodes, weights = self.q.rule(0.0, s)
        inner = sorted({d for v in vertices for d in self.daughters(v)}, key=str)
        pairs = {v: self.daughters(v) for v in vertices}

        def at_node(i: int) -> Dict[ShapeKey, SpectralVectorField]:
            sigma = float(nodes[i])
            below = self._evaluate_cached(inner, sigma, depth + 1)
            return {
                v: weights[i] * heat_propagate(
                    vertex_bilinear(below[m], below[u], dealias=self.dealias), s - sigma
                )
                for v, (m, u) in pairs.items()
            }

        per_node = bounded_map(at_node, range(len(nodes)), self.jobs if depth == 0 else 1)
        for v in vertices:
            result[v] = pairwise_sum([contribution[v] for contribution in per_node])
        return result


def tree_term(
    tree: MarkedBinaryTree,
    t: float,
    u0: Optional[SpectralVectorField] = None,
    q: Optional[SimplexQuadrature] = None,
    leaf_fields: Optional[Sequence[SpectralVectorField]] = None,
    dealias: bool = True,
    evaluator: Optional[TreeEvaluator] = None,
) -> SpectralVectorField:
    """
    The collision term of one tree at time t.

    The trivial tree gives exp(t Laplacian) u0; every nontrivial tree
    vanishes at t = 0.

    Args:
        tree: Marked binary tree with at most settings.TREE_TERM_CAP vertices
        t: Time
        u0: Initial field on every leaf
        q: Quadrature applied at every nesting level
        leaf_fields: Per-leaf initial fields in depth-first leaf order
        dealias: 2/3 rule in every vertex
        evaluator: Reuse an existing evaluator (and its cache)
    """
    if evaluator is None:
        evaluator = TreeEvaluator(u0=u0, q=q, leaf_fields=leaf_fields, dealias=dealias)
    if evaluator.per_leaf and len(evaluator.leaf_fields) != tree.leaf_count:
        raise InvalidParameterError(
            f"tree has {tree.leaf_count} leaves, got {len(evaluator.leaf_fields)} leaf fields"
        )
    return evaluator.evaluate([tree], t)[0]


def tree_sum(
    n: int,
    t: float,
    u0: SpectralVectorField,
    q: Optional[SimplexQuadrature] = None,
    dealias: bool = True,
    evaluator: Optional[TreeEvaluator] = None,
) -> SpectralVectorField:
    """Sum of tree_term over every tree with n vertices; n = 0 is the heat flow."""
    validate_integer(n, "n")
    if n > settings.TREE_TERM_CAP:
        raise CapExceededError(f"order {n} exceeds tree-term cap {settings.TREE_TERM_CAP}")
    evaluator = evaluator or TreeEvaluator(u0=u0, q=q, dealias=dealias)
    return pairwise_sum(evaluator.evaluate(enumerate_trees(n), t))


def refinement_estimate(
    evaluate: Callable[[SimplexQuadrature], SpectralVectorField],
    q: SimplexQuadrature,
    base: Optional[SpectralVectorField] = None,
) -> float:
    """L2 distance between a result and the same result on the refined rule."""
    base = evaluate(q) if base is None else base
    return l2_norm(base - evaluate(q.refined()))


def tree_sum_with_estimate(
    n: int,
    t: float,
    u0: SpectralVectorField,
    q: Optional[SimplexQuadrature] = None,
    dealias: bool = True,
) -> Tuple[SpectralVectorField, float]:
    q = q or default_quadrature()
    value = tree_sum(n, t, u0, q, dealias)
    estimate = refinement_estimate(lambda rule: tree_sum(n, t, u0, rule, dealias), q, value)
    return value, estimate


def _fit_log(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float]:
    """Slope and standard error of log y against x."""
    coeffs, cov = np.polyfit(np.asarray(xs, dtype=float), np.log(np.asarray(ys, dtype=float)), 1, cov=True)
    return float(coeffs[0]), float(np.sqrt(max(cov[0, 0], 0.0)))


def solution_series(
    u0: SpectralVectorField,
    t: float,
    max_order: int,
    q: Optional[SimplexQuadrature] = None,
    reference: Optional[SpectralVectorField] = None,
    reference_agreement: Optional[float] = None,
    dealias: bool = True,
    jobs: Optional[int] = None,
) -> Tuple[SeriesReport, SpectralVectorField]:
    """
    Partial sums exp(t Laplacian) u0 + sum over n <= max_order of the
    order-n tree sums.

    Args:
        u0: Divergence-free initial field
        t: Time
        max_order: Highest tree order included
        q: Quadrature rule
        reference: Independent solution at t, for the cumulative error column
        reference_agreement: Disagreement of the reference solvers, recorded as is

    Returns:
        The report and the partial sum of order max_order

    Raises:
        SmallTimeViolation: If the order-1 term exceeds the guard ratio of the order-0 term
        CapExceededError: If max_order exceeds the tree-term cap
    """
    validate_integer(max_order, "max_order")
    validate_positive(t, "t")
    if max_order < 0 or max_order > settings.TREE_TERM_CAP:
        raise CapExceededError(f"series order {max_order} outside [0, {settings.TREE_TERM_CAP}]")
    q = q or default_quadrature()
    evaluator = TreeEvaluator(u0=u0, q=q, dealias=dealias, cache=SubtreeCache(), jobs=jobs)
    report = SeriesReport(t=t, reference_agreement=reference_agreement)
    ref_norm = l2_norm(reference) if reference is not None else None
    partial = None

    for n in range(max_order + 1):
        started = time.perf_counter()
        term = tree_sum(n, t, u0, evaluator=evaluator)
        seconds = time.perf_counter() - started
        partial = term if partial is None else partial + term
        norm = l2_norm(term)
        report.orders.append(n)
        report.term_l2.append(norm)
        report.term_hneg2.append(sobolev_norm(term, -2.0))
        report.seconds.append(seconds)
        if reference is not None:
            diff = l2_norm(partial - reference)
            report.cum_error_vs_ref.append(diff / ref_norm if ref_norm else diff)
        else:
            report.cum_error_vs_ref.append(None)
        logger.info("Series order %d at t=%g: |term| = %.3e (%.2fs)", n, t, norm, seconds)

        if n == 1 and report.term_l2[0] > 0:
            ratio = norm / report.term_l2[0]
            if ratio > settings.SERIES_RATIO_GUARD:
                raise SmallTimeViolation(
                    f"order-1/order-0 ratio {ratio:.3f} exceeds {settings.SERIES_RATIO_GUARD} at t={t}"
                )

    _summarize_decay(report)
    return report, partial


def _summarize_decay(report: SeriesReport) -> None:
    orders = [n for n, norm in zip(report.orders, report.term_l2) if n >= 1 and norm > 0]
    norms = [report.term_l2[n] for n in orders]
    fit_orders = [n for n in orders if n >= 2]
    if len(fit_orders) < 2:
        fit_orders = orders
    if len(fit_orders) >= 2:
        slope = np.polyfit(fit_orders, np.log([report.term_l2[n] for n in fit_orders]), 1)[0]
        report.geometric_ratio = float(np.exp(slope))
    tail = norms[-3:]
    if len(tail) == 3 and not all(b < a for a, b in zip(tail, tail[1:])):
        report.non_decay = True
        logger.warning("Series terms do not decrease over orders %s at t=%g", orders[-3:], report.t)


def series_trajectory(
    u0: SpectralVectorField,
    times: Sequence[float],
    max_order: int,
    q: Optional[SimplexQuadrature] = None,
) -> Trajectory:
    """Partial sums of order max_order sampled on an increasing time grid (0 allowed)."""
    trajectory = Trajectory(kind="local")
    for t in times:
        if t == 0:
            trajectory.append(0.0, u0)
            continue
        evaluator = TreeEvaluator(u0=u0, q=q)
        partial = pairwise_sum([tree_sum(n, t, u0, evaluator=evaluator) for n in range(max_order + 1)])
        trajectory.append(t, partial)
    return trajectory


def error_tree_term(
    tree: MarkedBinaryTree,
    v: EdgeRef,
    tau: float,
    leaf_fields: Sequence[SpectralVectorField],
    q: Optional[SimplexQuadrature] = None,
    dealias: bool = True,
) -> SpectralVectorField:
    """
    The error operator of (tree, v) at time tau applied to per-leaf data.

    The maximal vertex v is applied to its two leaf fields without
    propagation; the merged field then sits on a leaf of the contracted tree.
    """
    if v not in maximal_vertices(tree):
        raise InvalidParameterError(f"vertex {v} is not maximal in {tree}")
    if len(leaf_fields) != tree.leaf_count:
        raise InvalidParameterError(f"tree has {tree.leaf_count} leaves, got {len(leaf_fields)}")
    i = leaf_index(tree, v.path + MARKED)
    merged = vertex_bilinear(leaf_fields[i], leaf_fields[i + 1], dealias=dealias)
    contracted = surgery_remove_maximal_vertex(as_forest(tree), v).trees[0]
    fields = list(leaf_fields[:i]) + [merged] + list(leaf_fields[i + 2:])
    return tree_term(contracted, tau, q=q, leaf_fields=fields, dealias=dealias)


def error_tree_sum(
    n: int,
    tau: float,
    state: SpectralVectorField,
    q: Optional[SimplexQuadrature] = None,
    dealias: bool = True,
) -> SpectralVectorField:
    """Sum over trees with n vertices and their maximal vertices of error_tree_term on state^(n+1)."""
    validate_integer(n, "n")
    if n < 1:
        raise InvalidParameterError(f"error operators need n >= 1, got {n}")
    terms = []
    for tree in enumerate_trees(n):
        fields = [state] * tree.leaf_count
        for v in sorted(maximal_vertices(tree), key=lambda e: e.path):
            terms.append(error_tree_term(tree, v, tau, fields, q, dealias))
    return pairwise_sum(terms)


def remainder_integral(
    n: int,
    t: float,
    state,
    q: Optional[SimplexQuadrature] = None,
    dealias: bool = True,
    jobs: Optional[int] = None,
) -> SpectralVectorField:
    """
    int_0^t of the order-n error operators at t - s applied to X(s)^(n+1).

    With X the solution this is u(t) minus the partial sum of order n-1.
    ``state`` is a field (constant in time) or a callable of time.
    """
    validate_positive(t, "t")
    q = q or default_quadrature()
    state_at = (lambda s: state) if isinstance(state, SpectralVectorField) else state
    nodes, weights = q.rule(0.0, t)
    jobs = settings.JOBS if jobs is None else jobs
    parts = bounded_map(
        lambda i: weights[i] * error_tree_sum(n, t - float(nodes[i]), state_at(float(nodes[i])), q, dealias),
        range(len(nodes)),
        jobs,
    )
    return pairwise_sum(parts)


def picard_reference(t: float, u0: SpectralVectorField) -> SpectralVectorField:
    cfg = SolverConfig(
        dt=settings.SOLVER_DT,
        integrator="picard",
        picard_nodes=settings.PICARD_NODES,
        picard_inner_nodes=settings.PICARD_INNER_NODES,
        max_sweeps=settings.PICARD_MAX_SWEEPS,
        tolerance=settings.PICARD_TOLERANCE,
    )
    return solve_picard(u0, t, cfg).final_field


def remainder_probe(
    n: int,
    times: Sequence[float],
    u0: SpectralVectorField,
    q: Optional[SimplexQuadrature] = None,
    reference: Optional[Callable[[float], SpectralVectorField]] = None,
) -> ProbeResult:
    """
    Fit the decay of the truncation error u(t) - S_{n-1}(t) in t.

    The slope of log error against log t is compared one-sidedly with the
    bound-implied value n/2.

    Raises:
        DegenerateFitError: With fewer than 3 usable (positive, finite) errors
    """
    validate_integer(n, "n")
    if not 1 <= n <= 4:
        raise InvalidParameterError(f"probe order must be in 1..4, got {n}")
    for t in times:
        if not 0 < t <= 0.2:
            raise InvalidParameterError(f"probe time {t} outside (0, 0.2]")
    q = q or default_quadrature()
    reference = reference or (lambda t: picard_reference(t, u0))

    usable_t, usable_e = [], []
    for t in sorted(times):
        evaluator = TreeEvaluator(u0=u0, q=q)
        partial = pairwise_sum([tree_sum(m, t, u0, evaluator=evaluator) for m in range(n)])
        error = l2_norm(reference(t) - partial)
        logger.debug("Probe n=%d t=%g: truncation error %.3e", n, t, error)
        if np.isfinite(error) and error > 0:
            usable_t.append(t)
            usable_e.append(error)
    if len(usable_t) < 3:
        raise DegenerateFitError(f"need at least 3 usable points, got {len(usable_t)}")
    slope, stderr = _fit_log(np.log(usable_t), usable_e)
    return ProbeResult(n, usable_t, usable_e, slope, 2.0 * stderr, n / 2.0)


def scaling_invariance_check(
    u0: SpectralVectorField,
    lam: int,
    t: float,
    method: str = "solver",
    dt: Optional[float] = None,
    max_order: int = 3,
    q: Optional[SimplexQuadrature] = None,
) -> float:
    """
    Relative L2 difference between solve-then-dilate and dilate-then-solve.

    Path A evolves u0 to lam^2 t and applies u -> lam u(lam x); path B dilates
    u0 first and evolves to t with the step divided by lam^2, so both paths
    take the same number of steps. ``method`` is "solver" or "series".
    """
    if isinstance(lam, bool) or not isinstance(lam, int) or lam < 1:
        raise InvalidParameterError(f"scale factor must be a positive integer, got {lam}")
    validate_positive(t, "t")
    scaled_u0 = rescale(u0, lam)
    if method == "solver":
        dt = dt or settings.SOLVER_DT
        path_a = solve_etd(u0, lam * lam * t, SolverConfig(dt=dt, estimate_error=False)).final_field
        path_b = solve_etd(scaled_u0, t, SolverConfig(dt=dt / lam ** 2, estimate_error=False)).final_field
    elif method == "series":
        _, path_a = solution_series(u0, lam * lam * t, max_order, q)
        _, path_b = solution_series(scaled_u0, t, max_order, q)
    else:
        raise InvalidParameterError(f"unknown scaling method {method!r}")
    path_a = rescale(path_a, lam)
    scale = l2_norm(path_b)
    diff = l2_norm(path_a - path_b)
    return diff / scale if scale else diff

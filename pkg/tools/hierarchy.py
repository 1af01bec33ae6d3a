"""
Low-rank k-particle tensor fields and the nested Duhamel iterates.

The direct iterates are the brute-force oracle for the tree expansion: every
nesting level applies the interaction operator to a low-rank tensor and
propagates the result with the k-particle heat flow.
"""

from math import prod
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import settings
from models.errors import CapExceededError, InvalidParameterError
from models.field_models import SpectralVectorField
from models.tensor_models import LowRankTensorField, RankOneTerm, SimplexQuadrature
from tools.interaction import k_plus, merge_slots, vertex_bilinear
from tools.spectral_ops import heat_propagate, inner_product
from utils.logger import setup_logger
from utils.numerics import bounded_map, pairwise_sum
from utils.validators import validate_integer, validate_nonnegative

logger = setup_logger(__name__)

StateSource = Union[SpectralVectorField, Callable[[float], SpectralVectorField]]


def tensor_power(u: SpectralVectorField, k: int) -> LowRankTensorField:
    """u (x) ... (x) u with k slots as a single rank-one term."""
    validate_integer(k, "k")
    if k < 1:
        raise InvalidParameterError(f"tensor power needs k >= 1, got {k}")
    return LowRankTensorField(k, u.grid, [RankOneTerm(1.0, (u,) * k)])


def _shared_heat(t: float) -> Callable[[SpectralVectorField], SpectralVectorField]:
    memo: Dict[int, Tuple[SpectralVectorField, SpectralVectorField]] = {}

    def propagate(f: SpectralVectorField) -> SpectralVectorField:
        hit = memo.get(id(f))
        if hit is None:
            hit = (f, heat_propagate(f, t))
            memo[id(f)] = hit
        return hit[1]

    return propagate


def heat_propagate_k(state: LowRankTensorField, t: float) -> LowRankTensorField:
    """
    The k-particle heat flow applied factor by factor.

    Factors shared between terms are propagated once and stay shared.
    """
    validate_nonnegative(t, "t")
    propagate = _shared_heat(t)
    terms = [
        RankOneTerm(term.coefficient, tuple(propagate(f) for f in term.factors), term.path)
        for term in state.terms
    ]
    return LowRankTensorField(state.order, state.grid, terms)


def _shared_vertex(dealias: bool) -> Callable[[SpectralVectorField, SpectralVectorField], SpectralVectorField]:
    memo: Dict[Tuple[int, int], tuple] = {}

    def merge(a: SpectralVectorField, b: SpectralVectorField) -> SpectralVectorField:
        key = (id(a), id(b))
        hit = memo.get(key)
        if hit is None:
            hit = (a, b, vertex_bilinear(a, b, dealias=dealias))
            memo[key] = hit
        return hit[2]

    return merge


def gram_inner(x: LowRankTensorField, y: LowRankTensorField) -> complex:
    """
    L2 pairing of two low-rank tensors, conjugate-linear in x.

    Computed from the factor Gram matrices, never from dense tensors.
    """
    if x.order != y.order or x.grid != y.grid:
        raise InvalidParameterError("gram_inner needs tensors of equal order on one grid")
    total = 0j
    for a in x.terms:
        for b in y.terms:
            value = np.conj(a.coefficient) * b.coefficient
            for fa, fb in zip(a.factors, b.factors):
                value *= inner_product(fa, fb)
            total += value
    return complex(total)


def tensor_norm(state: LowRankTensorField) -> float:
    return float(np.sqrt(max(gram_inner(state, state).real, 0.0)))


def collapse(state: LowRankTensorField) -> SpectralVectorField:
    """The single field represented by an order-1 tensor."""
    if state.order != 1:
        raise InvalidParameterError(f"only order-1 tensors collapse to a field, got order {state.order}")
    if not state.terms:
        return SpectralVectorField.zeros(state.grid)
    return pairwise_sum([term.coefficient * term.factors[0] for term in state.terms])


def consolidate(state: LowRankTensorField) -> LowRankTensorField:
    """Merge order-1 terms that share a slot path; leaves higher orders unchanged."""
    if state.order != 1:
        return state
    groups: Dict[tuple, List[SpectralVectorField]] = {}
    for term in state.terms:
        groups.setdefault(term.path, []).append(term.coefficient * term.factors[0])
    terms = [RankOneTerm(1.0, (pairwise_sum(fields),), path) for path, fields in groups.items()]
    return LowRankTensorField(1, state.grid, terms)


def dense_materialize(state: LowRankTensorField) -> np.ndarray:
    """
    Explicit coefficient array of shape (3N^3,) * k.

    Raises:
        CapExceededError: Outside the micro-grid guard (N and k limits in settings)
    """
    N, k = state.grid.N, state.order
    if N > settings.DENSE_MAX_N or k > settings.DENSE_MAX_K:
        raise CapExceededError(
            f"dense tensors are limited to N <= {settings.DENSE_MAX_N} and k <= {settings.DENSE_MAX_K}, "
            f"got N={N}, k={k}"
        )
    size = 3 * N ** 3
    dense = np.zeros((size,) * k, dtype=np.complex128)
    for term in state.terms:
        block = np.array(term.coefficient, dtype=np.complex128)
        for factor in term.factors:
            block = np.multiply.outer(block, factor.coeffs.reshape(-1))
        dense += block
    return dense


def dense_norm(dense: np.ndarray, state: LowRankTensorField) -> float:
    """L2 norm of a dense coefficient array under the lattice normalization."""
    factor = (state.grid.volume / float(state.grid.N) ** 6) ** state.order
    return float(np.sqrt(factor * np.sum(np.abs(dense) ** 2)))


def permute_slots(state: LowRankTensorField, sigma: Sequence[int]) -> LowRankTensorField:
    """Relabel slots: slot j of the result holds slot sigma[j] of the input."""
    if sorted(sigma) != list(range(state.order)):
        raise InvalidParameterError(f"{list(sigma)} is not a permutation of {state.order} slots")
    terms = [
        RankOneTerm(term.coefficient, tuple(term.factors[s] for s in sigma), term.path)
        for term in state.terms
    ]
    return LowRankTensorField(state.order, state.grid, terms)


def path_count(n: int, k: int) -> int:
    """k (k+1) ... (k+n-1): the number of slot-merge histories of n interactions."""
    return prod(range(k, k + n))


class _NestedDuhamel:
    """Recursive evaluation of the n-fold nested time integral."""

    def __init__(self, n: int, k: int, grid, base: Callable[[float], LowRankTensorField],
                 q: SimplexQuadrature, dealias: bool):
        self.n = n
        self.grid = grid
        self.k = k
        self.base = base
        self.q = q
        self.dealias = dealias

    def level(self, j: int, s: float) -> LowRankTensorField:
        """The order-(k+j) integrand value at time s."""
        if j == self.n:
            return self.base(s)
        if s == 0:
            return LowRankTensorField(self.k + j, self.grid)
        nodes, weights = self.q.rule(0.0, s)
        parts = [self.node(j, s, sigma, w) for sigma, w in zip(nodes, weights)]
        return consolidate(pairwise_sum(parts))

    def node(self, j: int, s: float, sigma: float, weight: float) -> LowRankTensorField:
        inner = self.level(j + 1, sigma)
        merged = merge_slots(inner, _shared_vertex(self.dealias), jobs=1)
        return heat_propagate_k(merged, s - sigma).scaled(weight)

    def top(self, t: float, jobs: int) -> LowRankTensorField:
        if t == 0:
            return self.level(0, 0.0)
        nodes, weights = self.q.rule(0.0, t)
        parts = bounded_map(lambda nw: self.node(0, t, nw[0], nw[1]), list(zip(nodes, weights)), jobs)
        return consolidate(pairwise_sum(parts))


def _check_order(n: int, k: int) -> None:
    validate_integer(n, "n")
    validate_integer(k, "k")
    if n < 1 or k < 1:
        raise InvalidParameterError(f"nested Duhamel terms need n >= 1 and k >= 1, got n={n}, k={k}")
    count = path_count(n, k)
    if count > settings.DUHAMEL_TERM_CAP:
        raise CapExceededError(
            f"n={n}, k={k} needs {count} rank-one terms, cap is {settings.DUHAMEL_TERM_CAP}"
        )


def duhamel_term_direct(
    n: int,
    k: int,
    t: float,
    u0: SpectralVectorField,
    q: Optional[SimplexQuadrature] = None,
    dealias: bool = True,
    jobs: Optional[int] = None,
) -> LowRankTensorField:
    """
    The fully expanded n-th Duhamel iterate of the k-particle hierarchy.

    Evaluates the integral over t > t_1 > ... > t_n > 0 of
    T(t - t_1) W T(t_1 - t_2) W ... W T(t_n) u0^(k+n) with the same
    one-dimensional rule at every nesting level.

    Args:
        n: Number of interactions (>= 1)
        k: Rank of the result
        t: Final time
        u0: Initial field
        q: Quadrature rule (default: settings node counts)
        dealias: 2/3 rule in every vertex
        jobs: Workers for the outermost quadrature nodes

    Returns:
        Order-k tensor. For k = 1 terms sharing a merge history are summed,
        leaving path_count(n, 1) terms; for k > 1 every history keeps one
        term per tuple of nested nodes, path_count(n, k) * q.nodes ** n in all

    Raises:
        CapExceededError: If k (k+1) ... (k+n-1) exceeds the term cap
    """
    _check_order(n, k)
    validate_nonnegative(t, "t")
    q = q or SimplexQuadrature("gauss_legendre", settings.QUAD_NODES, settings.QUAD_REFINED_NODES)
    jobs = settings.JOBS if jobs is None else jobs
    base = lambda s: tensor_power(heat_propagate(u0, s), k + n)
    result = _NestedDuhamel(n, k, u0.grid, base, q, dealias).top(t, jobs)
    logger.debug("Direct Duhamel n=%d k=%d t=%g: %d terms, %d paths", n, k, t, result.term_count, result.path_count)
    return result


def duhamel_remainder_direct(
    n: int,
    k: int,
    t: float,
    state: StateSource,
    q: Optional[SimplexQuadrature] = None,
    dealias: bool = True,
    jobs: Optional[int] = None,
) -> LowRankTensorField:
    """
    The remainder of the n-step expansion with X(t_n)^(k+n) in place of the
    propagated initial data.

    ``state`` is either a field (a state constant in time) or a callable
    returning the field at a given time, such as Trajectory.interpolate.
    """
    _check_order(n, k)
    validate_nonnegative(t, "t")
    q = q or SimplexQuadrature("gauss_legendre", settings.QUAD_NODES, settings.QUAD_REFINED_NODES)
    jobs = settings.JOBS if jobs is None else jobs
    if isinstance(state, SpectralVectorField):
        constant = tensor_power(state, k + n)
        grid = state.grid
        base = lambda s: constant
    else:
        grid = state(0.0).grid
        base = lambda s: tensor_power(state(s), k + n)
    return _NestedDuhamel(n, k, grid, base, q, dealias).top(t, jobs)


def consistency_check(u0: SpectralVectorField, k: int = 1) -> float:
    """
    |<u0^k, W+ u0^(k+1)>| with W+ the K+ part of the interaction operator.

    Vanishes for divergence-free u0; for k > 1 the pairing factorizes into
    k copies of the k = 1 pairing times powers of the squared norm.
    """
    validate_integer(k, "k")
    if k < 1:
        raise InvalidParameterError(f"consistency pairing needs k >= 1, got {k}")
    merged = merge_slots(tensor_power(u0, k + 1), lambda a, b: -k_plus(a, b), jobs=1)
    return abs(gram_inner(tensor_power(u0, k), merged))

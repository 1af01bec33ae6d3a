"""
The bilinear collision vertex and the interaction operators.

For a marked operand ``a`` and an unmarked operand ``b`` the tensor
products (a_mu b_i)^ are formed either pseudo-spectrally (pointwise products
of the inverse transforms) or by direct lattice convolution. Products are
kept complex so single-mode, non-Hermitian operands work unchanged.
"""

from typing import Callable, Optional

import numpy as np

from config.settings import settings
from models.errors import GridMismatchError, InvalidParameterError
from models.field_models import SpectralVectorField
from models.tensor_models import LowRankTensorField, RankOneTerm
from tools.spectral_ops import wave_tables
from utils.logger import setup_logger
from utils.numerics import bounded_map

logger = setup_logger(__name__)

PATHS = ("pseudo", "spectral")
_AXES = (1, 2, 3)


def _check_operands(a: SpectralVectorField, b: SpectralVectorField) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"vertex operands on grids N={a.grid.N} and N={b.grid.N}")


def _products(a: SpectralVectorField, b: SpectralVectorField, path: str, dealias: bool) -> np.ndarray:
    """(a_mu b_i)^ as an array of shape (3, 3, N, N, N)."""
    if path not in PATHS:
        raise InvalidParameterError(f"unknown product path {path!r}, expected one of {PATHS}")
    tables = wave_tables(a.grid)
    ac, bc = a.coeffs, b.coeffs
    if dealias:
        ac = ac * tables.mask
        bc = bc * tables.mask
    if path == "pseudo":
        pa = np.fft.ifftn(ac, axes=_AXES)
        pb = np.fft.ifftn(bc, axes=_AXES)
        prod = np.fft.fftn(pa[:, np.newaxis] * pb[np.newaxis, :], axes=(2, 3, 4))
    else:
        prod = _convolve(ac, bc)
    if dealias:
        prod = prod * tables.mask
    return prod


def _convolve(ac: np.ndarray, bc: np.ndarray) -> np.ndarray:
    """Cyclic lattice convolution sum_q a(q) b(p - q) / N**3 over the support of a."""
    N = ac.shape[1]
    prod = np.zeros((3, 3) + ac.shape[1:], dtype=np.complex128)
    support = np.argwhere(np.any(ac != 0, axis=0))
    for idx in support:
        shifted = np.roll(bc, shift=tuple(int(i) for i in idx), axis=_AXES)
        a_q = ac[(slice(None),) + tuple(idx)]
        prod += a_q[:, np.newaxis, np.newaxis, np.newaxis, np.newaxis] * shifted[np.newaxis]
    return prod / float(N) ** 3


def _k_plus(prod: np.ndarray, k: np.ndarray) -> np.ndarray:
    return 1j * np.einsum("ixyz,mixyz->mxyz", k, prod)


def _k_minus(prod: np.ndarray, k: np.ndarray, k2: np.ndarray) -> np.ndarray:
    contraction = np.einsum("lxyz,ixyz,lixyz->xyz", k, k, prod)
    scale = np.where(k2 > 0, contraction / np.where(k2 > 0, k2, 1.0), 0.0)
    return -1j * k * scale


def _finish(a: SpectralVectorField, coeffs: np.ndarray, divergence_free: bool) -> SpectralVectorField:
    coeffs[:, 0, 0, 0] = 0.0
    return SpectralVectorField(a.grid, coeffs, divergence_free, True)


def k_plus(
    a: SpectralVectorField,
    b: SpectralVectorField,
    path: str = "pseudo",
    dealias: bool = True,
) -> SpectralVectorField:
    """
    output_mu(p) = i p^i (a_mu b_i)^(p), the transform of div(a (x) b).

    Args:
        a: Marked operand (keeps the free index)
        b: Unmarked operand (its index is contracted)
        path: "pseudo" or "spectral" product evaluation
        dealias: Apply the 2/3 rule to operands and output

    Raises:
        GridMismatchError: If the operands live on different grids
    """
    _check_operands(a, b)
    tables = wave_tables(a.grid)
    prod = _products(a, b, path, dealias)
    return _finish(a, _k_plus(prod, tables.k_odd), False)


def k_minus(
    a: SpectralVectorField,
    b: SpectralVectorField,
    path: str = "pseudo",
    dealias: bool = True,
) -> SpectralVectorField:
    """output_mu(p) = -i p^mu p^l p^i / |p|^2 (a_l b_i)^(p); a pure gradient."""
    _check_operands(a, b)
    tables = wave_tables(a.grid)
    prod = _products(a, b, path, dealias)
    return _finish(a, _k_minus(prod, tables.k_odd, tables.k2_odd), False)


def vertex_bilinear(
    a: SpectralVectorField,
    b: SpectralVectorField,
    path: str = "pseudo",
    dealias: bool = True,
) -> SpectralVectorField:
    """
    The collision vertex -(K+ + K-)(a, b) = -P div(a (x) b).

    The minus sign of the interaction operator is included, so
    vertex_bilinear(u, u) is the Navier-Stokes nonlinearity. The output is
    divergence-free by construction and its mean mode is zero.

    Raises:
        GridMismatchError: If the operands live on different grids
        InvalidParameterError: If path is unknown
    """
    _check_operands(a, b)
    tables = wave_tables(a.grid)
    prod = _products(a, b, path, dealias)
    k = tables.k_odd
    coeffs = -(_k_plus(prod, k) + _k_minus(prod, k, tables.k2_odd))
    return _finish(a, coeffs, True)


def nonlinearity(u: SpectralVectorField, dealias: bool = True) -> SpectralVectorField:
    """-P div(u (x) u)."""
    return vertex_bilinear(u, u, dealias=dealias)


def merge_slots(
    state: LowRankTensorField,
    vertex_fn: Callable[[SpectralVectorField, SpectralVectorField], SpectralVectorField],
    jobs: Optional[int] = None,
) -> LowRankTensorField:
    """Merge the last slot into every other slot with ``vertex_fn``."""
    if state.order < 2:
        raise InvalidParameterError(f"interaction needs a tensor of order >= 2, got {state.order}")
    k = state.order - 1
    jobs = settings.JOBS if jobs is None else jobs
    tasks = [(term, j) for term in state.terms for j in range(k)]

    def merge(task):
        term, j = task
        factors = list(term.factors[:k])
        factors[j] = vertex_fn(term.factors[j], term.factors[k])
        return RankOneTerm(term.coefficient, tuple(factors), term.path + (j,))

    terms = bounded_map(merge, tasks, jobs)
    logger.debug("Merged %d terms of order %d into %d terms", state.term_count, state.order, len(terms))
    return LowRankTensorField(k, state.grid, terms)


def apply_W(state: LowRankTensorField, dealias: bool = True, jobs: Optional[int] = None) -> LowRankTensorField:
    """
    Sum over j of the vertex merging slot k+1 into slot j.

    A rank-one term of order k+1 yields k rank-one terms of order k; each
    output term records the merged slot in its path.
    """
    return merge_slots(state, lambda a, b: vertex_bilinear(a, b, dealias=dealias), jobs)


def apply_W_plus(state: LowRankTensorField, dealias: bool = True, jobs: Optional[int] = None) -> LowRankTensorField:
    """The K+ part of apply_W, carrying the same overall minus sign."""
    return merge_slots(state, lambda a, b: -k_plus(a, b, dealias=dealias), jobs)


def apply_W_minus(state: LowRankTensorField, dealias: bool = True, jobs: Optional[int] = None) -> LowRankTensorField:
    """The K- part of apply_W, carrying the same overall minus sign."""
    return merge_slots(state, lambda a, b: -k_minus(a, b, dealias=dealias), jobs)

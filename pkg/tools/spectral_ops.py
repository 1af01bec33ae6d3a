"""Single-particle spectral fields on the periodic torus.

Coefficients live in numpy fft order. The forward transform is the plain
lattice sum and the inverse divides by N**3, so norms carry a factor
(2*pi)**3 / N**6 to match the continuous L2 norm on the torus.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from models.errors import GridMismatchError, InvalidParameterError
from models.field_models import GridSpec, SpectralVectorField, WaveVector
from utils.logger import setup_logger
from utils.validators import validate_nonnegative, validate_positive

logger = setup_logger(__name__)

_AXES = (1, 2, 3)


@dataclass(frozen=True)
class WaveTables:
    """Read-only wavenumber tables for one grid."""
    k: np.ndarray          # (3, N, N, N) integer wavevectors
    k_odd: np.ndarray      # same with the Nyquist component zeroed
    k2: np.ndarray         # |k|^2
    k2_odd: np.ndarray     # |k_odd|^2
    mask: np.ndarray       # 2/3-rule retained band


@lru_cache(maxsize=16)
def wave_tables(grid: GridSpec) -> WaveTables:
    """Wavenumber tables, cached per grid; safe for concurrent lookup."""
    N = grid.N
    k1 = np.fft.fftfreq(N, 1.0 / N)
    k = np.array(np.meshgrid(k1, k1, k1, indexing="ij"))
    k1_odd = k1.copy()
    k1_odd[N // 2] = 0.0
    k_odd = np.array(np.meshgrid(k1_odd, k1_odd, k1_odd, indexing="ij"))
    k2 = np.sum(k * k, axis=0)
    k2_odd = np.sum(k_odd * k_odd, axis=0)
    mask = np.all(np.abs(k) < N / 3.0, axis=0)
    for array in (k, k_odd, k2, k2_odd, mask):
        array.setflags(write=False)
    return WaveTables(k, k_odd, k2, k2_odd, mask)


def physical_coordinates(grid: GridSpec) -> np.ndarray:
    """Sample points x_j = 2*pi*j/N, shape (3, N, N, N)."""
    x1 = 2.0 * np.pi * np.arange(grid.N) / grid.N
    return np.array(np.meshgrid(x1, x1, x1, indexing="ij"))


def transform_forward(samples: np.ndarray, grid: Optional[GridSpec] = None) -> SpectralVectorField:
    """
    Fourier coefficients of physical samples.

    Args:
        samples: Array of shape (3, N, N, N), real or complex
        grid: Expected grid; inferred from the samples if omitted

    Raises:
        GridMismatchError: If the sample shape does not fit the grid
    """
    samples = np.asarray(samples)
    if samples.ndim != 4 or samples.shape[0] != 3 or len(set(samples.shape[1:])) != 1:
        raise GridMismatchError(f"expected samples of shape (3, N, N, N), got {samples.shape}")
    if grid is None:
        grid = GridSpec(samples.shape[1])
    if samples.shape != grid.vector_shape:
        raise GridMismatchError(f"samples {samples.shape} do not match grid {grid.vector_shape}")
    coeffs = np.fft.fftn(samples, axes=_AXES)
    return SpectralVectorField(grid, coeffs)


def transform_inverse(u: SpectralVectorField, real: bool = False) -> np.ndarray:
    """Physical samples of a field; ``real`` drops the imaginary part."""
    samples = np.fft.ifftn(u.coeffs, axes=_AXES)
    return samples.real if real else samples


def heat_propagate(u: SpectralVectorField, t: float) -> SpectralVectorField:
    """Apply exp(t * Laplacian); flags are preserved."""
    validate_nonnegative(t, "t")
    if t == 0:
        return u
    factor = np.exp(-t * wave_tables(u.grid).k2)
    return u.with_coeffs(u.coeffs * factor)


def riesz(i: int, coeffs: np.ndarray) -> np.ndarray:
    """
    Riesz transform along axis i (1-based) of a scalar spectral component.

    The multiplier is i*k_i/|k|, with zero at k = 0.
    """
    if i not in (1, 2, 3):
        raise InvalidParameterError(f"axis index must be 1, 2 or 3, got {i}")
    coeffs = np.asarray(coeffs)
    tables = wave_tables(GridSpec(coeffs.shape[0]))
    norm = np.sqrt(tables.k2_odd)
    with np.errstate(divide="ignore", invalid="ignore"):
        multiplier = np.where(norm > 0, 1j * tables.k_odd[i - 1] / np.where(norm > 0, norm, 1.0), 0.0)
    return multiplier * coeffs


def leray_project(u: SpectralVectorField) -> SpectralVectorField:
    """Remove the component parallel to k at every k != 0; the mean passes through."""
    tables = wave_tables(u.grid)
    k = tables.k_odd
    k2 = tables.k2_odd
    parallel = np.sum(k * u.coeffs, axis=0)
    safe = np.where(k2 > 0, k2, 1.0)
    correction = np.where(k2 > 0, parallel / safe, 0.0)
    return u.with_coeffs(u.coeffs - k * correction, divergence_free=True)


def divergence(u: SpectralVectorField) -> np.ndarray:
    """Scalar coefficients of div u."""
    return 1j * np.sum(wave_tables(u.grid).k_odd * u.coeffs, axis=0)


def gradient(coeffs: np.ndarray, grid: Optional[GridSpec] = None) -> SpectralVectorField:
    """Gradient of a scalar field given by its coefficients."""
    coeffs = np.asarray(coeffs)
    grid = grid or GridSpec(coeffs.shape[0])
    k = wave_tables(grid).k_odd
    return SpectralVectorField(grid, 1j * k * coeffs[np.newaxis], False, True)


def _norm_factor(grid: GridSpec) -> float:
    return grid.volume / float(grid.N) ** 6


def inner_product(u: SpectralVectorField, v: SpectralVectorField) -> complex:
    """L2 pairing <u, v>, conjugate-linear in u."""
    u.check_grid(v)
    return complex(_norm_factor(u.grid) * np.vdot(u.coeffs, v.coeffs))


def l2_norm(u: SpectralVectorField) -> float:
    return float(np.sqrt(_norm_factor(u.grid) * np.sum(np.abs(u.coeffs) ** 2)))


def sobolev_norm(u: SpectralVectorField, alpha: float) -> float:
    """H^alpha norm with the multiplier (1 + |k|^2)^(alpha/2)."""
    weight = (1.0 + wave_tables(u.grid).k2) ** alpha
    return float(np.sqrt(_norm_factor(u.grid) * np.sum(weight * np.abs(u.coeffs) ** 2)))


def dissipation(u: SpectralVectorField) -> float:
    """Squared L2 norm of the velocity gradient."""
    return float(_norm_factor(u.grid) * np.sum(wave_tables(u.grid).k2 * np.abs(u.coeffs) ** 2))


def dealias(u: SpectralVectorField) -> SpectralVectorField:
    """Truncate to the 2/3-rule band."""
    return u.with_coeffs(u.coeffs * wave_tables(u.grid).mask)


def max_divergence(u: SpectralVectorField) -> float:
    """max |k . u(k)| relative to max |k| |u(k)|; 0 for the zero field."""
    tables = wave_tables(u.grid)
    scale = np.max(np.sqrt(tables.k2_odd) * np.sqrt(np.sum(np.abs(u.coeffs) ** 2, axis=0)))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(divergence(u))) / scale)


def mirrored(coeffs: np.ndarray) -> np.ndarray:
    """coeffs(-k) laid out in fft order."""
    flipped = np.flip(coeffs, axis=(-3, -2, -1))
    return np.roll(flipped, shift=1, axis=(-3, -2, -1))


def hermitian_defect(u: SpectralVectorField) -> float:
    """max |u(-k) - conj(u(k))| relative to max |u|."""
    scale = np.max(np.abs(u.coeffs))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(mirrored(u.coeffs) - np.conj(u.coeffs))) / scale)


def taylor_green(amplitude: float, grid: GridSpec = GridSpec(16)) -> SpectralVectorField:
    """A (sin x cos y cos z, -cos x sin y cos z, 0)."""
    validate_positive(amplitude, "amplitude")
    x, y, z = physical_coordinates(grid)
    samples = amplitude * np.array([
        np.sin(x) * np.cos(y) * np.cos(z),
        -np.cos(x) * np.sin(y) * np.cos(z),
        np.zeros_like(x),
    ])
    u = transform_forward(samples, grid)
    coeffs = np.array(u.coeffs)
    coeffs[:, 0, 0, 0] = 0.0
    return SpectralVectorField(grid, coeffs, True, True)


def random_divfree(
    seed: int,
    decay: float,
    grid: GridSpec = GridSpec(16),
    amplitude: float = 1.0,
) -> SpectralVectorField:
    """
    Reproducible random divergence-free, mean-zero field in the retained band.

    Spectral amplitudes fall off like (1 + |k|^2)^(-decay/2); the result is
    scaled so that its root-mean-square velocity equals ``amplitude``.

    Raises:
        InvalidParameterError: If decay <= 5/2
    """
    if decay <= 2.5:
        raise InvalidParameterError(f"spectral decay must exceed 5/2, got {decay}")
    validate_positive(amplitude, "amplitude")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.vector_shape)
    tables = wave_tables(grid)
    coeffs = np.fft.fftn(noise, axes=_AXES) * (1.0 + tables.k2) ** (-decay / 2.0) * tables.mask
    coeffs[:, 0, 0, 0] = 0.0
    u = leray_project(SpectralVectorField(grid, coeffs))
    rms = l2_norm(u) / np.sqrt(grid.volume)
    if rms == 0:
        raise InvalidParameterError("random field vanished; enlarge the grid")
    return SpectralVectorField(grid, u.coeffs * (amplitude / rms), True, True)


def compressible_fixture(grid: GridSpec = GridSpec(16)) -> SpectralVectorField:
    """(sin x, cos x + cos 2x, 0): a smooth field with div u = cos x."""
    x, _, _ = physical_coordinates(grid)
    samples = np.array([np.sin(x), np.cos(x) + np.cos(2 * x), np.zeros_like(x)])
    u = transform_forward(samples, grid)
    return SpectralVectorField(grid, u.coeffs, False, True)


def single_mode(grid: GridSpec, k: WaveVector, amplitude: Sequence[complex]) -> SpectralVectorField:
    """
    The complex field amplitude * exp(i k.x).

    The result is generally not Hermitian; it is meant for multilinear
    checks on a single momentum configuration.
    """
    amplitude = np.asarray(amplitude, dtype=np.complex128)
    if amplitude.shape != (3,):
        raise InvalidParameterError(f"amplitude must be a 3-vector, got shape {amplitude.shape}")
    coeffs = np.zeros(grid.vector_shape, dtype=np.complex128)
    idx = grid.index_of(k)
    coeffs[(slice(None),) + idx] = float(grid.N) ** 3 * amplitude
    div_free = abs(np.dot(np.asarray(k, dtype=float), amplitude)) == 0
    return SpectralVectorField(grid, coeffs, div_free, any(k))


def mode_amplitude(u: SpectralVectorField, k: WaveVector) -> np.ndarray:
    """Continuous amplitude vector at k (inverse of single_mode)."""
    return u.coefficient(k) / float(u.grid.N) ** 3


def rescale(u: SpectralVectorField, lam: int) -> SpectralVectorField:
    """
    The dilation lam * u(lam x) on the grid lam*N.

    With the plain-sum transform the coefficient at lam*k is lam**4 times
    the coefficient of u at k.
    """
    if isinstance(lam, bool) or not isinstance(lam, (int, np.integer)) or lam < 1:
        raise InvalidParameterError(f"scale factor must be a positive integer, got {lam}")
    if lam == 1:
        return u
    grid = u.grid.scaled(lam)
    N, M = u.grid.N, grid.N
    k1 = np.fft.fftfreq(N, 1.0 / N).astype(int)
    target = (lam * k1) % M
    coeffs = np.zeros(grid.vector_shape, dtype=np.complex128)
    coeffs[np.ix_(range(3), target, target, target)] = float(lam) ** 4 * u.coeffs
    return SpectralVectorField(grid, coeffs, u.divergence_free, u.mean_zero)

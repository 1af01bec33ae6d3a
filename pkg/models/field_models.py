"""Grid and spectral vector field data models."""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from models.errors import GridMismatchError

WaveVector = Tuple[int, int, int]


@dataclass(frozen=True)
class GridSpec:
    """N modes per axis on the 2*pi periodic torus, unit viscosity."""
    N: int

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, (int, np.integer)):
            raise TypeError(f"grid size must be an integer, got {type(self.N).__name__}")
        if self.N <= 0 or self.N % 2:
            raise ValueError(f"grid size must be even and positive, got {self.N}")

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.N, self.N, self.N)

    @property
    def vector_shape(self) -> Tuple[int, int, int, int]:
        return (3, self.N, self.N, self.N)

    @property
    def volume(self) -> float:
        return (2.0 * np.pi) ** 3

    def index_of(self, k: WaveVector) -> Tuple[int, int, int]:
        """Array index of a wavevector in fft order."""
        half = self.N // 2
        for component in k:
            if not -half <= component < half:
                raise ValueError(f"wavevector {k} outside grid range for N={self.N}")
        return tuple(int(c) % self.N for c in k)

    def scaled(self, factor: int) -> "GridSpec":
        return GridSpec(self.N * factor)


@dataclass(eq=False)
class SpectralVectorField:
    """
    Fourier coefficients of a 3-component velocity field.

    ``coeffs`` has shape (3, N, N, N) in numpy fft order. The forward
    transform is the plain lattice sum, so a physical field a*exp(i r.x)
    has coefficient N**3 * a at r.
    """
    grid: GridSpec
    coeffs: np.ndarray
    divergence_free: bool = False
    mean_zero: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.shape != self.grid.vector_shape:
            raise GridMismatchError(
                f"coefficient shape {coeffs.shape} does not match grid {self.grid.vector_shape}"
            )
        coeffs.setflags(write=False)
        self.coeffs = coeffs

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralVectorField":
        return cls(grid, np.zeros(grid.vector_shape, dtype=np.complex128), True, True)

    def with_coeffs(self, coeffs: np.ndarray, **flags) -> "SpectralVectorField":
        """New field on the same grid, inheriting flags unless overridden."""
        return SpectralVectorField(
            self.grid,
            coeffs,
            flags.get("divergence_free", self.divergence_free),
            flags.get("mean_zero", self.mean_zero),
        )

    def check_grid(self, other: "SpectralVectorField") -> None:
        if self.grid != other.grid:
            raise GridMismatchError(f"grid N={self.grid.N} differs from N={other.grid.N}")

    def coefficient(self, k: WaveVector) -> np.ndarray:
        """The 3-vector of coefficients at wavevector k."""
        idx = self.grid.index_of(k)
        return self.coeffs[(slice(None),) + idx].copy()

    def __add__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        self.check_grid(other)
        return SpectralVectorField(
            self.grid,
            self.coeffs + other.coeffs,
            self.divergence_free and other.divergence_free,
            self.mean_zero and other.mean_zero,
        )

    def __sub__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        return self + (-other)

    def __neg__(self) -> "SpectralVectorField":
        return self.with_coeffs(-self.coeffs)

    def __mul__(self, scalar: complex) -> "SpectralVectorField":
        return self.with_coeffs(scalar * self.coeffs)

    __rmul__ = __mul__

    # numpy scalars on the left defer to __rmul__
    __array_ufunc__ = None

"""Reference-solver configuration, stored trajectories and solve results."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from models.errors import InvalidParameterError, MissingTrajectoryError
from models.field_models import SpectralVectorField

INTEGRATORS = ("etd_rk2", "picard")


@dataclass(frozen=True)
class SolverConfig:
    """Settings of one reference solve."""
    dt: float = 5e-4
    integrator: str = "etd_rk2"
    dealias: bool = True
    nonlinear: bool = True
    oracle: bool = True
    estimate_error: bool = True
    store_every: int = 1
    picard_nodes: int = 16
    picard_inner_nodes: int = 24
    max_sweeps: int = 40
    tolerance: float = 1e-13
    cfl_limit: float = 0.5
    blowup_factor: float = 10.0

    def __post_init__(self):
        if self.integrator not in INTEGRATORS:
            raise InvalidParameterError(f"unknown integrator {self.integrator!r}")
        if self.dt <= 0:
            raise InvalidParameterError(f"time step must be positive, got {self.dt}")
        if self.oracle and not self.dealias:
            raise InvalidParameterError("dealiasing must be on for oracle solves")
        if self.picard_nodes < 3 or self.picard_inner_nodes < 2:
            raise InvalidParameterError("too few Picard collocation or quadrature nodes")
        if self.store_every < 1:
            raise InvalidParameterError("store_every must be at least 1")


@dataclass
class Trajectory:
    """
    Stored field samples u(t_i).

    ``kind`` is "local" for step-by-step samples (4-point Lagrange
    interpolation) or "chebyshev" for Chebyshev-Lobatto collocation nodes
    (global barycentric interpolation).
    """
    times: List[float] = field(default_factory=list)
    fields: List[SpectralVectorField] = field(default_factory=list)
    kind: str = "local"

    def append(self, t: float, u: SpectralVectorField) -> None:
        self.times.append(float(t))
        self.fields.append(u)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def t_final(self) -> float:
        return self.times[-1]

    def _combine(self, indices, weights) -> SpectralVectorField:
        base = self.fields[indices[0]]
        coeffs = np.zeros_like(base.coeffs)
        for i, w in zip(indices, weights):
            coeffs += w * self.fields[i].coeffs
        return base.with_coeffs(coeffs)

    def interpolate(self, t: float) -> SpectralVectorField:
        """The field at time t inside the stored range."""
        if not self.times:
            raise MissingTrajectoryError("trajectory is empty")
        times = np.asarray(self.times)
        span = max(abs(times[-1] - times[0]), 1e-300)
        if t < times[0] - 1e-12 * span or t > times[-1] + 1e-12 * span:
            raise MissingTrajectoryError(f"time {t} outside stored range [{times[0]}, {times[-1]}]")
        exact = np.nonzero(times == t)[0]
        if exact.size:
            return self.fields[int(exact[0])]
        if len(times) == 1:
            return self.fields[0]
        if self.kind == "chebyshev":
            return self._barycentric(times, t)
        return self._local_lagrange(times, t)

    def _local_lagrange(self, times: np.ndarray, t: float) -> SpectralVectorField:
        width = min(4, len(times))
        right = int(np.searchsorted(times, t))
        start = min(max(right - width // 2, 0), len(times) - width)
        nodes = list(range(start, start + width))
        weights = []
        for i in nodes:
            w = 1.0
            for j in nodes:
                if j != i:
                    w *= (t - times[j]) / (times[i] - times[j])
            weights.append(w)
        return self._combine(nodes, weights)

    def _barycentric(self, times: np.ndarray, t: float) -> SpectralVectorField:
        m = len(times)
        bary = np.array([(-1.0) ** j for j in range(m)])
        bary[0] *= 0.5
        bary[-1] *= 0.5
        terms = bary / (t - times)
        weights = terms / terms.sum()
        return self._combine(list(range(m)), list(weights))


@dataclass
class SolveResult:
    """Outcome of a reference solve."""
    final_field: SpectralVectorField
    trajectory: Trajectory
    integrator: str
    t_final: float
    error_estimate: float = 0.0
    energy_defect: float = 0.0
    steps: int = 0
    dt: float = 0.0
    sweeps: int = 0
    contraction_ratio: Optional[float] = None
    seconds: float = 0.0

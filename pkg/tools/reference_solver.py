"""
Reference solutions of the incompressible Navier-Stokes equation on the torus.

Two independent oracles: a second-order exponential time differencing
stepper (Cox-Matthews ETD2RK, heat factor treated exactly) and a Picard
fixed-point iteration of the mild formulation on Chebyshev-Lobatto nodes.
"""

import math
import time
from typing import Dict, Optional, Tuple

import numpy as np

from config.settings import settings
from models.errors import (
    BlowUpError,
    InvalidParameterError,
    MissingTrajectoryError,
    NonContractionError,
    StabilityError,
)
from models.field_models import GridSpec, SpectralVectorField
from models.solver_models import SolveResult, SolverConfig, Trajectory
from models.tensor_models import SimplexQuadrature
from tools.interaction import vertex_bilinear
from tools.spectral_ops import (
    dissipation,
    heat_propagate,
    l2_norm,
    leray_project,
    transform_inverse,
    wave_tables,
)
from utils.logger import setup_logger
from utils.numerics import pairwise_sum
from utils.validators import validate_nonnegative, validate_positive

logger = setup_logger(__name__)

CONTOUR_POINTS = 32
CONTOUR_RADIUS = 1.0
_ROUNDOFF = 1e-14


def _phi_functions(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2 by contour averaging."""
    theta = np.pi * (np.arange(1, CONTOUR_POINTS + 1) - 0.5) / CONTOUR_POINTS
    roots = z[:, np.newaxis] + CONTOUR_RADIUS * np.exp(1j * theta)[np.newaxis, :]
    phi1 = np.mean((np.exp(roots) - 1.0) / roots, axis=1).real
    phi2 = np.mean((np.exp(roots) - 1.0 - roots) / roots ** 2, axis=1).real
    return phi1, phi2


def _etd_coefficients(grid: GridSpec, h: float) -> Dict[str, np.ndarray]:
    k2 = wave_tables(grid).k2
    values, inverse = np.unique(k2, return_inverse=True)
    phi1, phi2 = _phi_functions(-h * values)
    shape = k2.shape
    return {
        "E": np.exp(-h * k2),
        "phi1": phi1[inverse].reshape(shape),
        "phi2": phi2[inverse].reshape(shape),
    }


def _nonlinear(u: SpectralVectorField, cfg: SolverConfig) -> np.ndarray:
    if not cfg.nonlinear:
        return np.zeros_like(u.coeffs)
    return vertex_bilinear(u, u, dealias=cfg.dealias).coeffs


def _check_cfl(u0: SpectralVectorField, dt: float, cfg: SolverConfig) -> None:
    speed = float(np.max(np.sqrt(np.sum(transform_inverse(u0, real=True) ** 2, axis=0))))
    number = dt * speed * (u0.grid.N // 2)
    if number > cfg.cfl_limit:
        raise StabilityError(f"CFL number {number:.3f} exceeds limit {cfg.cfl_limit} (dt={dt})")


def _check_initial(u0: SpectralVectorField, t_final: float) -> None:
    validate_nonnegative(t_final, "t_final")
    if not np.all(u0.coeffs[:, 0, 0, 0] == 0):
        raise InvalidParameterError("reference solvers need mean-zero initial data")


def _etd_run(u0: SpectralVectorField, t_final: float, steps: int, cfg: SolverConfig):
    h = t_final / steps
    coef = _etd_coefficients(u0.grid, h)
    E, phi1, phi2 = coef["E"], coef["phi1"], coef["phi2"]
    limit = cfg.blowup_factor * l2_norm(u0)

    u = u0
    trajectory = Trajectory(kind="local")
    trajectory.append(0.0, u0)
    energy0 = l2_norm(u0) ** 2
    dissipated = 0.0
    previous_rate = dissipation(u0)

    for step in range(1, steps + 1):
        nu = _nonlinear(u, cfg)
        a = u.with_coeffs(E * u.coeffs + h * phi1 * nu)
        na = _nonlinear(a, cfg)
        u = leray_project(u.with_coeffs(a.coeffs + h * phi2 * (na - nu)))
        norm = l2_norm(u)
        if limit > 0 and norm > limit:
            raise BlowUpError(f"norm {norm:.3e} exceeds {cfg.blowup_factor}x the initial norm at step {step}")
        rate = dissipation(u)
        dissipated += 0.5 * h * (previous_rate + rate)
        previous_rate = rate
        if step % cfg.store_every == 0 or step == steps:
            trajectory.append(step * h, u)

    final = u.with_coeffs(u.coeffs, divergence_free=True, mean_zero=True)
    defect = abs(l2_norm(final) ** 2 + 2.0 * dissipated - energy0)
    energy_defect = defect / energy0 if energy0 > 0 else defect
    return final, trajectory, energy_defect


def solve_etd(
    u0: SpectralVectorField,
    t_final: float,
    cfg: Optional[SolverConfig] = None,
) -> SolveResult:
    """
    Integrate the projected equation with ETD2RK.

    With ``cfg.estimate_error`` the solve is repeated with half the step;
    the finer solution is returned and the error estimate is a third of the
    difference between the two runs.

    Raises:
        StabilityError: If dt * max|u| * N/2 exceeds the CFL limit
        BlowUpError: If the norm grows beyond blowup_factor times the initial norm
    """
    cfg = cfg or SolverConfig()
    _check_initial(u0, t_final)
    started = time.perf_counter()
    if t_final == 0:
        trajectory = Trajectory(kind="local")
        trajectory.append(0.0, u0)
        return SolveResult(u0, trajectory, "etd_rk2", 0.0, dt=cfg.dt)

    steps = max(1, math.ceil(t_final / cfg.dt - 1e-9))
    _check_cfl(u0, t_final / steps, cfg)
    coarse, trajectory, energy_defect = _etd_run(u0, t_final, steps, cfg)
    error_estimate = 0.0
    if cfg.estimate_error:
        fine, trajectory, energy_defect = _etd_run(u0, t_final, 2 * steps, cfg)
        error_estimate = l2_norm(coarse - fine) / 3.0
        final, used_steps = fine, 2 * steps
    else:
        final, used_steps = coarse, steps

    seconds = time.perf_counter() - started
    logger.info(
        "ETD solve to t=%g: %d steps, error estimate %.2e, energy defect %.2e (%.2fs)",
        t_final, used_steps, error_estimate, energy_defect, seconds,
    )
    return SolveResult(
        final_field=final,
        trajectory=trajectory,
        integrator="etd_rk2",
        t_final=t_final,
        error_estimate=error_estimate,
        energy_defect=energy_defect,
        steps=used_steps,
        dt=t_final / used_steps,
        seconds=seconds,
    )


def measure_etd_order(
    u0: SpectralVectorField,
    t_final: float = 0.1,
    dt: float = 0.01,
    cfg: Optional[SolverConfig] = None,
) -> float:
    """Observed convergence order from runs with dt, dt/2 and dt/4."""
    cfg = cfg or SolverConfig(dt=dt, estimate_error=False)
    steps = max(1, math.ceil(t_final / dt - 1e-9))
    _check_cfl(u0, t_final / steps, cfg)
    runs = [_etd_run(u0, t_final, steps * m, cfg)[0] for m in (1, 2, 4)]
    e1 = l2_norm(runs[0] - runs[1])
    e2 = l2_norm(runs[1] - runs[2])
    if e2 == 0:
        raise InvalidParameterError("step refinement produced identical solutions")
    return float(np.log2(e1 / e2))


def chebyshev_lobatto(t_final: float, nodes: int) -> np.ndarray:
    """Increasing Chebyshev-Lobatto points on [0, t_final]."""
    j = np.arange(nodes)
    return 0.5 * t_final * (1.0 - np.cos(np.pi * j / (nodes - 1)))


def _lagrange_basis(times: np.ndarray, x: np.ndarray) -> np.ndarray:
    """L_l(x_i) as an array of shape (len(x), len(times))."""
    basis = np.ones((len(x), len(times)))
    for l in range(len(times)):
        for m in range(len(times)):
            if m != l:
                basis[:, l] *= (x - times[m]) / (times[l] - times[m])
    return basis


def _picard_weights(times: np.ndarray, k2_values: np.ndarray, inner_nodes: int) -> np.ndarray:
    """A[j, l, v] = int_0^{t_j} L_l(s) exp(-(t_j - s) k2_v) ds by Gauss-Legendre."""
    rule = SimplexQuadrature("gauss_legendre", inner_nodes, inner_nodes + 1)
    weights = np.zeros((len(times), len(times), len(k2_values)))
    for j, tj in enumerate(times):
        if tj == 0:
            continue
        s, ws = rule.rule(0.0, float(tj))
        basis = _lagrange_basis(times, s)
        decay = np.exp(-np.outer(tj - s, k2_values))
        weights[j] = np.einsum("i,il,iv->lv", ws, basis, decay)
    return weights


def solve_picard(
    u0: SpectralVectorField,
    t_final: float,
    cfg: Optional[SolverConfig] = None,
    sweeps: Optional[int] = None,
) -> SolveResult:
    """
    Fixed point of u = exp(t Laplacian) u0 + int_0^t exp((t-s) Laplacian) B(u, u) ds.

    The unknown is sampled on Chebyshev-Lobatto nodes and the time integral
    uses the interpolating polynomial. Sweep 0 is the heat flow; sweep m is
    the order-m Picard polynomial.

    Args:
        u0: Mean-zero initial field
        t_final: Final time
        cfg: Solver configuration (nodes, sweeps, tolerance)
        sweeps: Run exactly this many sweeps, skipping the convergence test

    Raises:
        NonContractionError: If successive updates stop shrinking
    """
    cfg = cfg or SolverConfig(integrator="picard")
    _check_initial(u0, t_final)
    started = time.perf_counter()
    if t_final == 0:
        trajectory = Trajectory(kind="chebyshev")
        trajectory.append(0.0, u0)
        return SolveResult(u0, trajectory, "picard", 0.0)

    times = chebyshev_lobatto(t_final, cfg.picard_nodes)
    k2 = wave_tables(u0.grid).k2
    k2_values, inverse = np.unique(k2, return_inverse=True)
    inverse = inverse.reshape(k2.shape)
    weights = _picard_weights(times, k2_values, cfg.picard_inner_nodes)

    free = [heat_propagate(u0, float(tj)) for tj in times]
    current = list(free)
    scale = max(max(l2_norm(f) for f in free), 1e-300)
    target = sweeps if sweeps is not None else cfg.max_sweeps

    previous_delta = None
    delta = 0.0
    ratio = None
    done = 0
    for sweep in range(1, target + 1):
        forcing = [_nonlinear(f, cfg) for f in current]
        updated = []
        for j in range(len(times)):
            table = weights[j][:, inverse]
            integral = np.sum(table[:, np.newaxis] * np.asarray(forcing), axis=0)
            updated.append(free[j].with_coeffs(free[j].coeffs + integral, divergence_free=True))
        delta = max(l2_norm(a - b) for a, b in zip(updated, current)) / scale
        current = updated
        done = sweep
        if previous_delta is not None and previous_delta > 0:
            ratio = delta / previous_delta
        logger.debug("Picard sweep %d: update %.3e, ratio %s", sweep, delta, ratio)
        if sweeps is not None:
            previous_delta = delta
            continue
        if delta <= max(cfg.tolerance, _ROUNDOFF):
            break
        if ratio is not None and ratio >= 1.0 and delta > 100.0 * max(cfg.tolerance, _ROUNDOFF):
            raise NonContractionError(f"Picard update grew from {previous_delta:.3e} to {delta:.3e}")
        previous_delta = delta
    else:
        if sweeps is None and target > 0:
            logger.warning("Picard iteration stopped after %d sweeps without reaching tolerance", target)

    trajectory = Trajectory(list(map(float, times)), current, kind="chebyshev")
    seconds = time.perf_counter() - started
    logger.info("Picard solve to t=%g: %d sweeps, ratio %s (%.2fs)", t_final, done, ratio, seconds)
    return SolveResult(
        final_field=current[-1],
        trajectory=trajectory,
        integrator="picard",
        t_final=t_final,
        error_estimate=delta,
        sweeps=done,
        contraction_ratio=ratio,
        seconds=seconds,
    )


def solve(u0: SpectralVectorField, t_final: float, cfg: Optional[SolverConfig] = None) -> SolveResult:
    """Dispatch on cfg.integrator."""
    cfg = cfg or SolverConfig()
    if cfg.integrator == "picard":
        return solve_picard(u0, t_final, cfg)
    return solve_etd(u0, t_final, cfg)


def residual_mild(
    u_candidate: SpectralVectorField,
    u0: SpectralVectorField,
    t: float,
    q: Optional[SimplexQuadrature] = None,
    trajectory: Optional[Trajectory] = None,
    nonlinear: bool = True,
    dealias: bool = True,
) -> float:
    """
    L2 norm of u_c - exp(t Laplacian) u0 - int_0^t exp((t-s) Laplacian) B(u_c(s), u_c(s)) ds.

    The integrand is evaluated on the interpolated trajectory of the
    candidate; ``nonlinear=False`` drops the integral.

    Raises:
        MissingTrajectoryError: If the integral is needed and no trajectory is given
    """
    validate_positive(t, "t")
    residual = u_candidate - heat_propagate(u0, t)
    if nonlinear:
        if trajectory is None:
            raise MissingTrajectoryError("the mild residual needs the candidate's trajectory")
        q = q or SimplexQuadrature("gauss_legendre", settings.PICARD_NODES, settings.PICARD_INNER_NODES)
        nodes, weights = q.rule(0.0, t)
        parts = []
        for s, w in zip(nodes, weights):
            state = trajectory.interpolate(float(s))
            parts.append(w * heat_propagate(vertex_bilinear(state, state, dealias=dealias), t - float(s)))
        residual = residual - pairwise_sum(parts)
    return l2_norm(residual)

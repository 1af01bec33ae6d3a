"""
Unit tests for the ETD and Picard reference solvers.
"""

import unittest

import numpy as np

from config.settings import settings
from models.errors import InvalidParameterError, MissingTrajectoryError, StabilityError
from models.field_models import GridSpec
from models.solver_models import SolverConfig, Trajectory
from models.tensor_models import SimplexQuadrature
from tools.reference_solver import (
    chebyshev_lobatto,
    measure_etd_order,
    residual_mild,
    solve,
    solve_etd,
    solve_picard,
)
from tools.spectral_ops import heat_propagate, l2_norm, random_divfree, taylor_green


class TestEtd(unittest.TestCase):
    """Test cases for the exponential time-differencing stepper."""

    def setUp(self):
        """Set up test fixtures."""
        self.u0 = random_divfree(3, 3.0, GridSpec(8), amplitude=0.5)

    def test_linear_solve_is_heat_flow(self):
        """Test that dropping the nonlinearity leaves exp(t Laplacian) u0."""
        cfg = SolverConfig(dt=0.01, nonlinear=False, estimate_error=False)
        result = solve_etd(self.u0, 0.1, cfg)
        expected = heat_propagate(self.u0, 0.1)
        self.assertLess(l2_norm(result.final_field - expected) / l2_norm(expected), 1e-12)
        self.assertEqual(result.steps, 10)

    def test_energy_balance(self):
        """Test that energy plus dissipation is conserved to step accuracy."""
        result = solve_etd(self.u0, 0.05, SolverConfig(dt=1e-3))
        self.assertLess(result.energy_defect, 1e-4)
        self.assertGreater(result.error_estimate, 0.0)
        self.assertEqual(len(result.trajectory), result.steps + 1)

    def test_second_order(self):
        """Test the observed convergence order."""
        order = measure_etd_order(self.u0, t_final=0.1, dt=0.01)
        self.assertAlmostEqual(order, 2.0, delta=0.3)

    def test_zero_time(self):
        """Test that t = 0 returns the initial field."""
        self.assertIs(solve_etd(self.u0, 0.0).final_field, self.u0)

    def test_cfl_guard(self):
        """Test that an unstable step is refused."""
        u0 = random_divfree(3, 3.0, GridSpec(8), amplitude=5.0)
        with self.assertRaises(StabilityError):
            solve_etd(u0, 1.0, SolverConfig(dt=0.5))

    def test_mean_mode_refused(self):
        """Test that data with a mean flow is refused."""
        coeffs = np.array(self.u0.coeffs)
        coeffs[0, 0, 0, 0] = 1.0
        with self.assertRaises(InvalidParameterError):
            solve_etd(self.u0.with_coeffs(coeffs), 0.1)


class TestPicard(unittest.TestCase):
    """Test cases for the Picard fixed-point solver."""

    def setUp(self):
        """Set up test fixtures."""
        self.u0 = random_divfree(3, 3.0, GridSpec(8), amplitude=0.5)
        self.cfg = SolverConfig(
            integrator="picard",
            picard_nodes=settings.PICARD_NODES,
            picard_inner_nodes=settings.PICARD_INNER_NODES,
        )

    def test_converges(self):
        """Test that the sweeps contract to the tolerance."""
        result = solve_picard(self.u0, 0.05, self.cfg)
        self.assertLessEqual(result.error_estimate, max(self.cfg.tolerance, 1e-14))
        self.assertLess(result.contraction_ratio, 1.0)
        self.assertEqual(result.trajectory.kind, "chebyshev")
        self.assertEqual(len(result.trajectory), self.cfg.picard_nodes)

    def test_agrees_with_etd(self):
        """Test that the two oracles agree."""
        picard = solve_picard(self.u0, 0.05, self.cfg)
        etd = solve(self.u0, 0.05, SolverConfig(dt=5e-4))
        self.assertLess(l2_norm(picard.final_field - etd.final_field) / l2_norm(picard.final_field), 1e-6)

    def test_mild_residual(self):
        """Test the residual of the mild formulation on the Picard solution."""
        result = solve_picard(self.u0, 0.05, self.cfg)
        q = SimplexQuadrature("gauss_legendre", 24, 32)
        residual = residual_mild(result.final_field, self.u0, 0.05, q, result.trajectory)
        self.assertLess(residual / l2_norm(result.final_field), 1e-8)

    def test_mild_residual_needs_trajectory(self):
        """Test that the nonlinear residual needs a trajectory."""
        with self.assertRaises(MissingTrajectoryError):
            residual_mild(self.u0, self.u0, 0.05)
        linear = residual_mild(heat_propagate(self.u0, 0.05), self.u0, 0.05, nonlinear=False)
        self.assertEqual(linear, 0.0)

    def test_fixed_sweeps(self):
        """Test that sweep 0 is the heat flow."""
        result = solve_picard(self.u0, 0.05, self.cfg, sweeps=0)
        self.assertEqual(result.sweeps, 0)
        self.assertEqual(l2_norm(result.final_field - heat_propagate(self.u0, 0.05)), 0.0)


class TestTrajectory(unittest.TestCase):
    """Test cases for stored trajectories."""

    def setUp(self):
        """Set up test fixtures."""
        u = taylor_green(1.0, GridSpec(8))
        self.trajectory = Trajectory()
        for t in (0.0, 0.1, 0.2, 0.3, 0.4):
            self.trajectory.append(t, u * (1.0 + 2.0 * t))
        self.u = u

    def test_local_interpolation_is_exact_for_linear_data(self):
        """Test interpolation between samples."""
        value = self.trajectory.interpolate(0.25)
        self.assertLess(l2_norm(value - self.u * 1.5), 1e-12 * l2_norm(self.u))

    def test_out_of_range(self):
        """Test that extrapolation is refused."""
        with self.assertRaises(MissingTrajectoryError):
            self.trajectory.interpolate(0.5)
        with self.assertRaises(MissingTrajectoryError):
            Trajectory().interpolate(0.0)

    def test_chebyshev_nodes(self):
        """Test the collocation node endpoints."""
        nodes = chebyshev_lobatto(0.2, 5)
        self.assertEqual(nodes[0], 0.0)
        self.assertAlmostEqual(nodes[-1], 0.2, places=15)
        self.assertTrue(np.all(np.diff(nodes) > 0))


class TestSolverConfig(unittest.TestCase):
    """Test cases for solver configuration."""

    def test_invalid_values(self):
        """Test that inconsistent settings are refused."""
        with self.assertRaises(InvalidParameterError):
            SolverConfig(integrator="euler")
        with self.assertRaises(InvalidParameterError):
            SolverConfig(dt=0.0)
        with self.assertRaises(InvalidParameterError):
            SolverConfig(dealias=False)


if __name__ == "__main__":
    unittest.main()

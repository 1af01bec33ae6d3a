"""
Unit tests for spectral field operators and fixtures.
"""

import unittest

import numpy as np
import numpy.testing as npt

from models.errors import GridMismatchError, InvalidParameterError
from models.field_models import GridSpec, SpectralVectorField
from tools.spectral_ops import (
    compressible_fixture,
    divergence,
    gradient,
    heat_propagate,
    hermitian_defect,
    inner_product,
    l2_norm,
    leray_project,
    max_divergence,
    mode_amplitude,
    physical_coordinates,
    random_divfree,
    rescale,
    riesz,
    single_mode,
    sobolev_norm,
    taylor_green,
    transform_forward,
    transform_inverse,
    wave_tables,
)


def random_field(seed: int, grid: GridSpec) -> SpectralVectorField:
    rng = np.random.default_rng(seed)
    return SpectralVectorField(grid, np.fft.fftn(rng.standard_normal(grid.vector_shape), axes=(1, 2, 3)))


class TestTransforms(unittest.TestCase):
    """Test cases for transforms and norms."""

    def setUp(self):
        """Set up test fixtures."""
        self.grid = GridSpec(8)

    def test_single_mode_coefficient(self):
        """Test that a*exp(i r.x) has coefficient N^3 a at r."""
        x = physical_coordinates(self.grid)
        amplitude = np.array([0.0, 1.0, 0.5])
        samples = amplitude[:, None, None, None] * np.exp(1j * x[0])[None]
        u = transform_forward(samples)
        npt.assert_allclose(mode_amplitude(u, (1, 0, 0)), amplitude, atol=1e-12)

    def test_inverse_round_trip(self):
        """Test that the inverse transform recovers the samples."""
        rng = np.random.default_rng(1)
        samples = rng.standard_normal(self.grid.vector_shape)
        u = transform_forward(samples, self.grid)
        npt.assert_allclose(transform_inverse(u, real=True), samples, atol=1e-12)

    def test_shape_mismatch(self):
        """Test that samples of the wrong shape are rejected."""
        with self.assertRaises(GridMismatchError):
            transform_forward(np.zeros((3, 8, 8, 4)))
        with self.assertRaises(GridMismatchError):
            transform_forward(np.zeros((3, 8, 8, 8)), GridSpec(16))

    def test_norm_of_single_mode(self):
        """Test the continuous L2 normalization."""
        u = single_mode(self.grid, (1, 2, 0), [1.0, 0.0, 0.0])
        self.assertAlmostEqual(l2_norm(u), (2.0 * np.pi) ** 1.5, places=10)

    def test_taylor_green_is_real_and_divergence_free(self):
        """Test the Taylor-Green fixture."""
        u = taylor_green(0.1, self.grid)
        self.assertLess(hermitian_defect(u), 1e-12)
        self.assertLess(max_divergence(u), 1e-12)
        npt.assert_allclose(u.coeffs[:, 0, 0, 0], 0.0)


class TestLeray(unittest.TestCase):
    """Test cases for the Leray projection."""

    def setUp(self):
        """Set up test fixtures."""
        self.grid = GridSpec(8)
        self.u = random_field(3, self.grid)
        self.v = random_field(4, self.grid)

    def test_idempotent(self):
        """Test P P u = P u."""
        once = leray_project(self.u)
        twice = leray_project(once)
        self.assertLess(l2_norm(twice - once) / l2_norm(self.u), 1e-12)

    def test_self_adjoint(self):
        """Test <P u, v> = <u, P v>."""
        left = inner_product(leray_project(self.u), self.v)
        right = inner_product(self.u, leray_project(self.v))
        self.assertLess(abs(left - right) / (l2_norm(self.u) * l2_norm(self.v)), 1e-12)

    def test_annihilates_gradients(self):
        """Test P grad phi = 0."""
        grad = gradient(self.u.coeffs[1], self.grid)
        self.assertLess(l2_norm(leray_project(grad)) / l2_norm(grad), 1e-12)

    def test_output_is_divergence_free(self):
        """Test div P u = 0 and that the mean passes through."""
        projected = leray_project(self.u)
        npt.assert_allclose(divergence(projected), 0.0, atol=1e-9)
        npt.assert_allclose(projected.coeffs[:, 0, 0, 0], self.u.coeffs[:, 0, 0, 0])
        self.assertTrue(projected.divergence_free)

    def test_riesz_identity(self):
        """Test sum_i R_i R_i = -1 away from k = 0."""
        scalar = self.u.coeffs[0]
        total = sum(riesz(i, riesz(i, scalar)) for i in (1, 2, 3))
        tables = wave_tables(self.grid)
        nonzero = tables.k2_odd > 0
        npt.assert_allclose(total[nonzero], -scalar[nonzero], atol=1e-9)
        self.assertEqual(total[0, 0, 0], 0)

    def test_riesz_rejects_bad_axis(self):
        """Test that the axis index is checked."""
        with self.assertRaises(InvalidParameterError):
            riesz(0, self.u.coeffs[0])


class TestHeat(unittest.TestCase):
    """Test cases for the heat semigroup."""

    def setUp(self):
        """Set up test fixtures."""
        self.u = random_field(5, GridSpec(8))

    def test_identity_at_zero(self):
        """Test exp(0 Laplacian) u = u."""
        self.assertIs(heat_propagate(self.u, 0.0), self.u)

    def test_semigroup(self):
        """Test T(s) T(t) = T(s + t)."""
        a = heat_propagate(heat_propagate(self.u, 0.01), 0.02)
        b = heat_propagate(self.u, 0.03)
        self.assertLess(l2_norm(a - b) / l2_norm(self.u), 1e-13)

    def test_contraction(self):
        """Test that the heat flow contracts every Sobolev norm."""
        for alpha in (-1.0, 0.0, 1.0):
            before = sobolev_norm(self.u, alpha)
            after = sobolev_norm(heat_propagate(self.u, 0.1), alpha)
            self.assertLessEqual(after, before * (1.0 + 1e-13))

    def test_negative_time_rejected(self):
        """Test that backward heat flow is refused."""
        with self.assertRaises(ValueError):
            heat_propagate(self.u, -0.1)


class TestFixtures(unittest.TestCase):
    """Test cases for generated fields."""

    def test_random_divfree_is_reproducible(self):
        """Test that the seed fixes the field."""
        a = random_divfree(11, 3.0, GridSpec(8))
        b = random_divfree(11, 3.0, GridSpec(8))
        npt.assert_array_equal(a.coeffs, b.coeffs)
        self.assertLess(max_divergence(a), 1e-12)
        self.assertLess(hermitian_defect(a), 1e-12)

    def test_random_divfree_amplitude(self):
        """Test the root-mean-square normalization."""
        u = random_divfree(2, 3.0, GridSpec(8), amplitude=0.5)
        self.assertAlmostEqual(l2_norm(u) / np.sqrt(u.grid.volume), 0.5, places=12)

    def test_decay_must_exceed_threshold(self):
        """Test that slowly decaying spectra are refused."""
        with self.assertRaises(InvalidParameterError):
            random_divfree(1, 2.5, GridSpec(8))

    def test_compressible_fixture(self):
        """Test that the counterexample has nonzero divergence."""
        u = compressible_fixture(GridSpec(8))
        self.assertFalse(u.divergence_free)
        self.assertGreater(max_divergence(u), 0.1)

    def test_single_mode_round_trip(self):
        """Test single_mode and mode_amplitude are inverse."""
        amplitude = np.array([1.0 + 2.0j, -1.0j, 0.0])
        u = single_mode(GridSpec(8), (1, -2, 3), amplitude)
        npt.assert_allclose(mode_amplitude(u, (1, -2, 3)), amplitude)

    def test_rescale(self):
        """Test that dilation by 2 moves mode k to 2k with factor 16."""
        u = single_mode(GridSpec(8), (1, 0, 0), [0.0, 1.0, 0.0])
        scaled = rescale(u, 2)
        self.assertEqual(scaled.grid, GridSpec(16))
        npt.assert_allclose(mode_amplitude(scaled, (2, 0, 0)), [0.0, 2.0, 0.0])
        self.assertIs(rescale(u, 1), u)

    def test_rescale_rejects_fraction(self):
        """Test that only integer factors are allowed."""
        with self.assertRaises(InvalidParameterError):
            rescale(taylor_green(0.1, GridSpec(8)), 1.5)


if __name__ == "__main__":
    unittest.main()

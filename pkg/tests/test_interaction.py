"""
Unit tests for the collision vertex and the interaction operators.
"""

import unittest

import numpy as np
import numpy.testing as npt

from models.errors import GridMismatchError, InvalidParameterError
from models.field_models import GridSpec
from tools.hierarchy import collapse, tensor_power
from tools.interaction import (
    apply_W,
    apply_W_minus,
    apply_W_plus,
    k_minus,
    k_plus,
    merge_slots,
    nonlinearity,
    vertex_bilinear,
)
from tools.spectral_ops import (
    l2_norm,
    leray_project,
    max_divergence,
    mode_amplitude,
    random_divfree,
    single_mode,
)


class TestVertex(unittest.TestCase):
    """Test cases for the bilinear vertex."""

    def setUp(self):
        """Set up test fixtures."""
        self.grid = GridSpec(8)
        self.a = random_divfree(1, 3.0, self.grid)
        self.b = random_divfree(2, 3.0, self.grid)

    def test_paths_agree(self):
        """Test that pseudo-spectral and convolution products agree."""
        pseudo = vertex_bilinear(self.a, self.b, path="pseudo")
        spectral = vertex_bilinear(self.a, self.b, path="spectral")
        self.assertLess(l2_norm(pseudo - spectral) / l2_norm(pseudo), 1e-12)

    def test_output_divergence_free_and_mean_zero(self):
        """Test div W(a, b) = 0 and a vanishing mean mode."""
        out = vertex_bilinear(self.a, self.b)
        self.assertLess(max_divergence(out), 1e-12)
        npt.assert_array_equal(out.coeffs[:, 0, 0, 0], 0)
        self.assertTrue(out.divergence_free)

    def test_single_mode_formula(self):
        """Test W(a e_r, b e_s) = -P_p[i (p.b) a] e_p with p = r + s."""
        a = single_mode(self.grid, (1, 0, 0), [0.0, 1.0, 1.0])
        b = single_mode(self.grid, (0, 1, 0), [1.0, 0.0, 1.0])
        out = vertex_bilinear(a, b, dealias=False)
        npt.assert_allclose(mode_amplitude(out, (1, 1, 0)), [0.5j, -0.5j, -1.0j], atol=1e-13)

    def test_projection_of_k_plus(self):
        """Test W(a, b) = -P K+(a, b) since K- is a gradient."""
        out = vertex_bilinear(self.a, self.b)
        projected = -leray_project(k_plus(self.a, self.b))
        self.assertLess(l2_norm(out - projected) / l2_norm(out), 1e-12)
        self.assertLess(l2_norm(leray_project(k_minus(self.a, self.b))), 1e-10 * l2_norm(out))

    def test_grid_mismatch(self):
        """Test that operands on different grids are refused."""
        with self.assertRaises(GridMismatchError):
            vertex_bilinear(self.a, random_divfree(1, 3.0, GridSpec(12)))

    def test_unknown_path(self):
        """Test that an unknown product path is refused."""
        with self.assertRaises(InvalidParameterError):
            vertex_bilinear(self.a, self.b, path="fast")


class TestInteractionOperator(unittest.TestCase):
    """Test cases for apply_W on low-rank tensors."""

    def setUp(self):
        """Set up test fixtures."""
        self.u = random_divfree(3, 3.0, GridSpec(8))

    def test_term_paths(self):
        """Test that order k+1 yields k terms labelled by the merged slot."""
        merged = apply_W(tensor_power(self.u, 3), jobs=1)
        self.assertEqual(merged.order, 2)
        self.assertEqual(merged.term_count, 2)
        self.assertEqual(sorted(t.path for t in merged.terms), [(0,), (1,)])

    def test_split_into_plus_and_minus(self):
        """Test W = W+ + W- on the tensor square."""
        state = tensor_power(self.u, 2)
        whole = collapse(apply_W(state, jobs=1))
        parts = collapse(apply_W_plus(state, jobs=1)) + collapse(apply_W_minus(state, jobs=1))
        self.assertLess(l2_norm(whole - parts) / l2_norm(whole), 1e-12)

    def test_matches_nonlinearity(self):
        """Test W(u (x) u) = -P div(u (x) u)."""
        whole = collapse(apply_W(tensor_power(self.u, 2), jobs=1))
        self.assertLess(l2_norm(whole - nonlinearity(self.u)), 1e-12 * l2_norm(whole))

    def test_order_one_refused(self):
        """Test that a single slot cannot interact."""
        with self.assertRaises(InvalidParameterError):
            merge_slots(tensor_power(self.u, 1), vertex_bilinear)


if __name__ == "__main__":
    unittest.main()

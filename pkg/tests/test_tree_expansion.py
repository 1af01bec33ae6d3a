"""
Unit tests for time-domain tree terms, the solution series and the
error-operator remainder.
"""

import unittest

from config.settings import settings
from models.errors import CapExceededError, InvalidParameterError, SmallTimeViolation
from models.field_models import GridSpec
from models.solver_models import SolverConfig
from models.tensor_models import SimplexQuadrature
from models.tree_models import LEAF, EdgeRef, vertex
from tools.hierarchy import collapse, duhamel_remainder_direct, duhamel_term_direct
from tools.interaction import vertex_bilinear
from tools.reference_solver import solve_etd, solve_picard
from tools.spectral_ops import heat_propagate, l2_norm, random_divfree, taylor_green
from tools.tree_expansion import (
    SubtreeCache,
    TreeEvaluator,
    default_quadrature,
    error_tree_sum,
    error_tree_term,
    refinement_estimate,
    remainder_integral,
    remainder_probe,
    scaling_invariance_check,
    series_trajectory,
    solution_series,
    tree_sum,
    tree_sum_with_estimate,
    tree_term,
)

ONE = vertex(LEAF, LEAF)


class TestTreeTerms(unittest.TestCase):
    """Test cases for single collision terms."""

    def setUp(self):
        """Set up test fixtures."""
        self.u0 = random_divfree(4, 3.0, GridSpec(8), amplitude=0.5)
        self.q = SimplexQuadrature("gauss_legendre", 4, 6)

    def test_trivial_tree_is_heat_flow(self):
        """Test that the leaf carries exp(t Laplacian) u0."""
        value = tree_term(LEAF, 0.1, self.u0, self.q)
        self.assertEqual(l2_norm(value - heat_propagate(self.u0, 0.1)), 0.0)

    def test_vanishes_at_zero(self):
        """Test that nontrivial trees vanish at t = 0."""
        self.assertEqual(l2_norm(tree_term(vertex(ONE, LEAF), 0.0, self.u0, self.q)), 0.0)

    def test_one_vertex_by_hand(self):
        """Test the single-vertex tree against the explicit quadrature sum."""
        t = 0.1
        nodes, weights = self.q.rule(0.0, t)
        expected = None
        for s, w in zip(nodes, weights):
            us = heat_propagate(self.u0, s)
            piece = heat_propagate(vertex_bilinear(us, us), t - s) * w
            expected = piece if expected is None else expected + piece
        value = tree_term(ONE, t, self.u0, self.q)
        self.assertLess(l2_norm(value - expected) / l2_norm(expected), 1e-13)

    def test_matches_direct_iterates(self):
        """Test that tree sums equal the direct Duhamel iterates."""
        for n in (1, 2):
            trees = tree_sum(n, 0.1, self.u0, self.q)
            direct = collapse(duhamel_term_direct(n, 1, 0.1, self.u0, self.q, jobs=1))
            self.assertLess(l2_norm(trees - direct) / l2_norm(direct), 1e-10)

    def test_shared_cache(self):
        """Test that a second evaluation is served from the cache."""
        cache = SubtreeCache()
        evaluator = TreeEvaluator(u0=self.u0, q=self.q, cache=cache, jobs=1)
        first = tree_sum(2, 0.1, self.u0, evaluator=evaluator)
        misses = cache.misses
        second = tree_sum(2, 0.1, self.u0, evaluator=evaluator)
        self.assertEqual(cache.misses, misses)
        self.assertGreater(cache.hits, 0)
        self.assertEqual(l2_norm(first - second), 0.0)

    def test_cache_keeps_first_value(self):
        """Test insert-or-get semantics."""
        cache = SubtreeCache()
        self.assertIs(cache.put(("k",), self.u0), self.u0)
        self.assertIs(cache.put(("k",), -self.u0), self.u0)
        self.assertEqual(len(cache), 1)

    def test_per_leaf_fields(self):
        """Test that per-leaf data must match the leaf count."""
        with self.assertRaises(InvalidParameterError):
            tree_term(ONE, 0.1, q=self.q, leaf_fields=[self.u0])
        with self.assertRaises(InvalidParameterError):
            TreeEvaluator(u0=self.u0, leaf_fields=[self.u0])

    def test_caps(self):
        """Test the tree-order and vertex-budget caps."""
        with self.assertRaises(CapExceededError):
            tree_sum(7, 0.1, self.u0, self.q)
        evaluator = TreeEvaluator(u0=self.u0, q=self.q, vertex_budget=10)
        with self.assertRaises(CapExceededError):
            tree_sum(3, 0.1, self.u0, evaluator=evaluator)


class TestSolutionSeries(unittest.TestCase):
    """Test cases for truncated series."""

    def setUp(self):
        """Set up test fixtures."""
        self.q = SimplexQuadrature("gauss_legendre", 4, 6)

    def test_terms_decay(self):
        """Test geometric decay of the tree sums for small data."""
        u0 = random_divfree(4, 3.0, GridSpec(8), amplitude=0.2)
        report, partial = solution_series(u0, 0.05, 3, self.q, jobs=1)
        self.assertEqual(report.orders, [0, 1, 2, 3])
        self.assertTrue(all(b < a for a, b in zip(report.term_l2[1:], report.term_l2[2:])))
        self.assertFalse(report.non_decay)
        self.assertLess(report.geometric_ratio, 1.0)
        self.assertEqual(partial.grid, u0.grid)

    def test_small_time_guard(self):
        """Test that large data is refused."""
        u0 = random_divfree(4, 3.0, GridSpec(8), amplitude=200.0)
        with self.assertRaises(SmallTimeViolation):
            solution_series(u0, 0.2, 2, self.q, jobs=1)

    def test_series_trajectory(self):
        """Test that the sampled partial sums match the series at each time."""
        u0 = random_divfree(4, 3.0, GridSpec(8), amplitude=0.2)
        trajectory = series_trajectory(u0, [0.0, 0.02, 0.05], 1, self.q)
        self.assertEqual(trajectory.times, [0.0, 0.02, 0.05])
        self.assertIs(trajectory.fields[0], u0)
        _, partial = solution_series(u0, 0.05, 1, self.q, jobs=1)
        self.assertLess(l2_norm(trajectory.fields[2] - partial), 1e-10 * l2_norm(partial))

    def test_order_outside_cap(self):
        """Test that the series order is bounded."""
        u0 = random_divfree(4, 3.0, GridSpec(8))
        with self.assertRaises(CapExceededError):
            solution_series(u0, 0.1, 7, self.q)


class TestErrorOperators(unittest.TestCase):
    """Test cases for error operators and the remainder."""

    def setUp(self):
        """Set up test fixtures."""
        self.grid = GridSpec(8)
        self.a = random_divfree(1, 3.0, self.grid, amplitude=0.5)
        self.b = random_divfree(2, 3.0, self.grid, amplitude=0.5)
        self.q = SimplexQuadrature("gauss_legendre", 4, 6)

    def test_one_vertex_error_term(self):
        """Test that contracting the only vertex leaves the heat-propagated vertex."""
        value = error_tree_term(ONE, EdgeRef(0), 0.1, [self.a, self.b], self.q)
        expected = heat_propagate(vertex_bilinear(self.a, self.b), 0.1)
        self.assertLess(l2_norm(value - expected) / l2_norm(expected), 1e-13)

    def test_non_maximal_vertex_refused(self):
        """Test that only maximal vertices can be contracted."""
        tree = vertex(ONE, LEAF)
        with self.assertRaises(InvalidParameterError):
            error_tree_term(tree, EdgeRef(0), 0.1, [self.a] * 3, self.q)

    def test_error_tree_sum_single_vertex(self):
        """Test that the order-1 error sum is the heat-propagated vertex of the state."""
        value = error_tree_sum(1, 0.1, self.a, self.q)
        expected = heat_propagate(vertex_bilinear(self.a, self.a), 0.1)
        self.assertLess(l2_norm(value - expected) / l2_norm(expected), 1e-13)

    def test_error_tree_sum_closes_the_series(self):
        """Test u(t) minus the partial sum below order n against the integrated error sums."""
        t = 0.05
        q = SimplexQuadrature("gauss_legendre", 8, 10)
        solution = solve_picard(self.a, t, SolverConfig(integrator="picard"))
        partial = None
        for n in (1, 2):
            term = tree_sum(n - 1, t, self.a, q)
            partial = term if partial is None else partial + term
            with self.subTest(n=n):
                truncation = solution.final_field - partial
                remainder = remainder_integral(n, t, solution.trajectory.interpolate, q, jobs=1)
                self.assertLess(l2_norm(truncation - remainder), 1e-4 * l2_norm(truncation))

    def test_error_tree_sum_order(self):
        """Test that error sums start at one vertex."""
        with self.assertRaises(InvalidParameterError):
            error_tree_sum(0, 0.1, self.a, self.q)

    def test_first_remainder_matches_direct(self):
        """Test the order-1 remainder against the direct iterate."""
        value = remainder_integral(1, 0.1, self.a, self.q, jobs=1)
        direct = collapse(duhamel_remainder_direct(1, 1, 0.1, self.a, self.q, jobs=1))
        self.assertLess(l2_norm(value - direct) / l2_norm(direct), 1e-12)

    def test_probe_time_range(self):
        """Test that probe times are restricted to (0, 0.2]."""
        with self.assertRaises(InvalidParameterError):
            remainder_probe(1, [0.05, 0.1, 0.5], self.a, self.q, reference=lambda t: self.a)
        with self.assertRaises(InvalidParameterError):
            remainder_probe(5, [0.05, 0.1, 0.2], self.a, self.q, reference=lambda t: self.a)


class TestScaling(unittest.TestCase):
    """Test cases for the dilation symmetry."""

    def test_solver_paths_agree(self):
        """Test solve-then-dilate against dilate-then-solve."""
        u0 = random_divfree(6, 3.0, GridSpec(8), amplitude=0.5)
        self.assertLess(scaling_invariance_check(u0, 2, 0.005, dt=1e-3), 1e-9)

    def test_invalid_arguments(self):
        """Test that fractional scales and unknown methods are refused."""
        u0 = random_divfree(6, 3.0, GridSpec(8))
        with self.assertRaises(InvalidParameterError):
            scaling_invariance_check(u0, 1.5, 0.01)
        with self.assertRaises(InvalidParameterError):
            scaling_invariance_check(u0, 2, 0.01, method="guess")


@unittest.skipUnless(settings.RUN_SLOW_TESTS, "set RUN_SLOW_TESTS=1 to run")
class TestAcceptanceScale(unittest.TestCase):
    """Test cases on the N = 16 Taylor-Green fixture at t = 0.05."""

    def setUp(self):
        """Set up test fixtures."""
        self.u0 = taylor_green(0.1, GridSpec(16))
        self.q = default_quadrature()
        self.t = 0.05

    def test_tree_sums_match_direct_iterates(self):
        """Test tree sums against the nested Duhamel iterates for n <= 3."""
        limits = {1: 1e-6, 2: 1e-6, 3: 1e-5}
        for n, limit in limits.items():
            with self.subTest(n=n):
                trees, tree_est = tree_sum_with_estimate(n, self.t, self.u0, self.q)

                def direct(rule, n=n):
                    return collapse(duhamel_term_direct(n, 1, self.t, self.u0, rule))

                oracle = direct(self.q)
                oracle_est = refinement_estimate(direct, self.q, oracle)
                tolerance = min(limit, max(3.0 * (tree_est + oracle_est), 1e-12 * l2_norm(oracle)))
                self.assertLessEqual(l2_norm(trees - oracle), tolerance)

    def test_order_five_series_matches_reference(self):
        """Test the order-5 partial sum against the ETD solution."""
        reference = solve_etd(self.u0, self.t, SolverConfig()).final_field
        report, _ = solution_series(self.u0, self.t, 5, self.q, reference=reference)
        self.assertLessEqual(report.cum_error_vs_ref[-1], 1e-4)
        self.assertLess(report.geometric_ratio, 0.5)
        self.assertFalse(report.non_decay)


if __name__ == "__main__":
    unittest.main()

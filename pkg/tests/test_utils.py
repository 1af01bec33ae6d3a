"""
Unit tests for the parameter validators and numeric helpers.
"""

import unittest

import utils
from utils.numerics import bounded_map, pairwise_sum
from utils.validators import (
    validate_integer,
    validate_nonnegative,
    validate_number,
    validate_positive,
)


class TestValidators(unittest.TestCase):
    """Test cases for the validate_* helpers."""

    def test_number(self):
        """Test that booleans and strings are not numbers."""
        validate_number(2.5)
        for bad in (True, "3", None):
            with self.subTest(value=bad):
                with self.assertRaises(TypeError):
                    validate_number(bad)

    def test_integer(self):
        """Test that floats are not integers."""
        validate_integer(3)
        with self.assertRaises(TypeError):
            validate_integer(3.0)

    def test_positive(self):
        """Test the strict positivity check."""
        validate_positive(1e-12, "t")
        with self.assertRaises(ValueError) as ctx:
            validate_positive(0.0, "t")
        self.assertIn("t", str(ctx.exception))

    def test_nonnegative(self):
        """Test that zero is accepted and negatives are refused."""
        validate_nonnegative(0)
        with self.assertRaises(ValueError):
            validate_nonnegative(-1e-300)

    def test_package_exports(self):
        """Test that every exported helper is importable from the package."""
        for name in utils.__all__:
            with self.subTest(name=name):
                self.assertTrue(callable(getattr(utils, name)))


class TestNumerics(unittest.TestCase):
    """Test cases for pairwise_sum and bounded_map."""

    def test_pairwise_sum(self):
        """Test the sum and the empty-input error."""
        self.assertEqual(pairwise_sum([1, 2, 3, 4, 5]), 15)
        with self.assertRaises(ValueError):
            pairwise_sum([])

    def test_bounded_map_keeps_order(self):
        """Test that threaded results come back in input order."""
        self.assertEqual(bounded_map(lambda x: x * x, range(10), jobs=4), [x * x for x in range(10)])
        self.assertEqual(bounded_map(str, [1, 2], jobs=1), ["1", "2"])


if __name__ == "__main__":
    unittest.main()

"""
Unit tests for the run configuration.
"""

import tempfile
import unittest
from pathlib import Path

from pydantic import ValidationError

from models.run_models import RunConfig


class TestRunConfig(unittest.TestCase):
    """Test cases for RunConfig."""

    def setUp(self):
        """Set up test fixtures."""
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / "run.cfg"

    def tearDown(self):
        self.tmp.cleanup()

    def test_defaults_are_valid(self):
        """Test that the default configuration validates."""
        cfg = RunConfig()
        self.assertEqual(cfg.grid_n, 16)
        self.assertEqual(cfg.initial_kind, "taylor_green")

    def test_from_file(self):
        """Test parsing a flat KEY=VALUE file with a time list."""
        self.path.write_text("GRID_N=8\nINITIAL_KIND=random\nTIMES=0.05, 0.1\nDEALIAS=false\n", encoding="utf-8")
        cfg = RunConfig.from_file(self.path)
        self.assertEqual(cfg.grid_n, 8)
        self.assertEqual(cfg.times, [0.05, 0.1])
        self.assertFalse(cfg.dealias)

    def test_unknown_key_rejected(self):
        """Test that typos in the file are refused."""
        self.path.write_text("GRID_NN=8\n", encoding="utf-8")
        with self.assertRaises(ValidationError):
            RunConfig.from_file(self.path)

    def test_missing_file(self):
        """Test that a missing file is reported."""
        with self.assertRaises(FileNotFoundError):
            RunConfig.from_file(self.path)

    def test_invalid_values(self):
        """Test range checks on individual keys."""
        for bad in ({"grid_n": 9}, {"times": [0.0]}, {"decay": 2.0}, {"amplitude": -1.0},
                    {"tau_nodes": 1001}, {"probe_times": [0.1, 0.2]}):
            with self.subTest(bad=bad):
                with self.assertRaises(ValidationError):
                    RunConfig(**bad)

    def test_caps(self):
        """Test the enumeration and expansion caps."""
        with self.assertRaises(ValidationError):
            RunConfig(tree_n_max=11)
        with self.assertRaises(ValidationError):
            RunConfig(forest_k_max=5)
        with self.assertRaises(ValidationError):
            RunConfig(series_max_order=7)
        with self.assertRaises(ValidationError):
            RunConfig(quad_nodes=12, quad_refined_nodes=12)

    def test_overrides_and_provenance(self):
        """Test validated overrides and the provenance block."""
        cfg = RunConfig().with_overrides(seed=3, jobs=None)
        self.assertEqual(cfg.seed, 3)
        provenance = cfg.provenance()
        self.assertEqual(provenance["config"]["seed"], 3)
        self.assertIn("code_version", provenance)
        with self.assertRaises(ValidationError):
            cfg.with_overrides(jobs=0)


if __name__ == "__main__":
    unittest.main()

"""
Unit tests for the verification workflow and the command-line driver.
"""

import json
import tempfile
import unittest
from pathlib import Path

from main import main
from models.run_models import RunConfig
from pipeline.graph import VerificationWorkflow
from pipeline.orchestrator import run_verify
from pipeline.suites import SuiteContext, combinatorics_suite, run_check, solver_fixtures, solvers_suite
from tools.spectral_ops import hermitian_defect, l2_norm, max_divergence

SMALL = {"tree_n_max": 4, "forest_n_max": 3, "forest_k_max": 3, "grid_n": 8, "jobs": 1}


class TestChecks(unittest.TestCase):
    """Test cases for individual checks."""

    def test_exception_becomes_failure(self):
        """Test that a raising check is recorded, not propagated."""
        def broken():
            raise RuntimeError("boom")
        result = run_check("demo", "broken", broken)
        self.assertFalse(result.success)
        self.assertIn("boom", result.error)

    def test_combinatorics_suite(self):
        """Test that the combinatorics checks pass on small caps."""
        ctx = SuiteContext.from_config(RunConfig(**SMALL))
        results = combinatorics_suite(ctx)
        self.assertEqual(len(results), 4)
        self.assertTrue(all(r.success for r in results), [r.to_dict() for r in results if not r.success])

    def test_solver_fixtures_are_real_and_divergence_free(self):
        """Test that every solver fixture is a real divergence-free field."""
        ctx = SuiteContext.from_config(RunConfig(**SMALL))
        fixtures = solver_fixtures(ctx)
        self.assertEqual(sorted(fixtures), ["random_divfree", "single_mode", "taylor_green"])
        for name, u in fixtures.items():
            with self.subTest(fixture=name):
                self.assertLess(hermitian_defect(u), 1e-14)
                self.assertLess(max_divergence(u), 1e-12)
                self.assertGreater(l2_norm(u), 0.0)

    def test_solver_agreement_on_every_fixture_and_time(self):
        """Test one agreement and one residual check per fixture and time."""
        ctx = SuiteContext.from_config(RunConfig(**SMALL, times=[0.02, 0.05]))
        results = solvers_suite(ctx)
        self.assertEqual(len(results), 3 * 2 * 2 + 1)
        paired = [r for r in results if r.name != "etd_order"]
        names = {r.name for r in paired}
        for fixture in ("taylor_green", "random_divfree", "single_mode"):
            for t in ("0.02", "0.05"):
                self.assertIn(f"etd_picard_agreement_{fixture}_t{t}", names)
                self.assertIn(f"picard_mild_residual_{fixture}_t{t}", names)
        failed = [r.to_dict() for r in paired if not r.success]
        self.assertEqual(failed, [])
        self.assertEqual(len(ctx.artifacts["references"]), 6)


class TestVerificationWorkflow(unittest.TestCase):
    """Test cases for the LangGraph workflow."""

    def test_invalid_config(self):
        """Test that an invalid configuration skips the suites with exit code 2."""
        state = VerificationWorkflow(["combinatorics"]).run({"grid_n": 7})
        self.assertEqual(state["report"]["status"], "invalid_config")
        self.assertEqual(state["report"]["exit_code"], 2)
        self.assertEqual(state["results"], [])

    def test_unknown_suite(self):
        """Test that unknown suite names are refused."""
        with self.assertRaises(ValueError):
            VerificationWorkflow(["nonsense"])

    def test_passing_run(self):
        """Test a full pass through the graph."""
        state = VerificationWorkflow(["combinatorics"]).run(SMALL)
        report = state["report"]
        self.assertEqual(report["exit_code"], 0)
        self.assertEqual(report["failed"], 0)
        self.assertEqual(report["provenance"]["config"]["tree_n_max"], 4)
        self.assertGreaterEqual(len(report["reasoning"]), 3)


class TestDriver(unittest.TestCase):
    """Test cases for the command-line entry points."""

    def setUp(self):
        """Set up test fixtures."""
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_run_verify_writes_reports(self):
        """Test the verify report files."""
        code = run_verify({**SMALL, "output_dir": str(self.out)}, ["combinatorics"])
        self.assertEqual(code, 0)
        report = json.loads((self.out / "verify_report.json").read_text(encoding="utf-8"))
        self.assertEqual(report["status"], "passed")
        self.assertIn("schema_version", report)
        self.assertTrue((self.out / "verify_checks.csv").is_file())

    def test_trees_command(self):
        """Test the catalog files and their counts."""
        code = main(["trees", "--out", str(self.out), "--n-max", "3", "--k-max", "2"])
        self.assertEqual(code, 0)
        lines = (self.out / "trees_n3.txt").read_text(encoding="utf-8").splitlines()
        self.assertEqual(len(lines), 5)
        first = (self.out / "counts.csv").read_bytes()
        main(["trees", "--out", str(self.out), "--n-max", "3", "--k-max", "2"])
        self.assertEqual((self.out / "counts.csv").read_bytes(), first)

    def test_trees_over_cap(self):
        """Test that oversized catalogs exit with code 2 and leave no files."""
        self.assertEqual(main(["trees", "--out", str(self.out), "--n-max", "2", "--k-max", "5"]), 2)
        self.assertEqual(sorted(self.out.glob("*.txt")), [])
        self.assertFalse((self.out / "counts.csv").exists())

    def test_invalid_config_file(self):
        """Test that bad or missing config files exit with code 2."""
        path = self.out / "bad.cfg"
        path.write_text("GRID_N=7\n", encoding="utf-8")
        self.assertEqual(main(["verify", "--config", str(path), "--out", str(self.out)]), 2)
        self.assertEqual(main(["solve", "--config", str(self.out / "missing.cfg")]), 2)

    def test_verify_from_file(self):
        """Test verify with a config file and a suite filter."""
        path = self.out / "small.cfg"
        path.write_text("TREE_N_MAX=4\nFOREST_N_MAX=3\nFOREST_K_MAX=3\nGRID_N=8\n", encoding="utf-8")
        code = main(["verify", "--config", str(path), "--out", str(self.out), "--jobs", "1",
                     "--suite", "combinatorics"])
        self.assertEqual(code, 0)


if __name__ == "__main__":
    unittest.main()

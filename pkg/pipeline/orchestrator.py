"""Runs each command-line subcommand and writes its artifacts."""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from models.report_models import SeriesReport
from models.run_models import RunConfig
from pipeline.graph import VerificationWorkflow
from pipeline.suites import SuiteContext, kernel_suite, scaling_suite
from storage.report_writer import ReportWriter
from storage.snapshot_store import SnapshotStore
from tools.reference_solver import solve_etd, solve_picard
from tools.spectral_ops import l2_norm
from tools.tree_expansion import solution_series
from utils.logger import setup_logger

logger = setup_logger(__name__)

CHECK_COLUMNS = ("suite", "name", "success", "measured", "tolerance", "message", "error", "seconds")
KERNEL_COLUMNS = ("name", "success", "residual", "tolerance", "error")
SOLVE_COLUMNS = ("integrator", "t_final", "steps", "dt", "sweeps", "error_estimate",
                 "energy_defect", "contraction_ratio", "l2_norm", "seconds")


def run_verify(raw_config: Dict[str, Any], suites: Optional[Sequence[str]] = None) -> int:
    """
    Run the verification workflow and write verify_report.json and verify_checks.csv.

    Returns:
        0 if every check passed, 1 on any failure, 2 for a refused configuration
    """
    state = VerificationWorkflow(suites).run(raw_config)
    report = state["report"]
    cfg = state.get("config")
    if cfg is None:
        logger.error("Verification refused: %s", "; ".join(report["reasoning"][:1]))
        return report["exit_code"]
    writer = ReportWriter(Path(cfg.output_dir), cfg.provenance())
    writer.write_json("verify_report", report)
    writer.write_csv("verify_checks", report["checks"], CHECK_COLUMNS)
    series = state.get("artifacts", {}).get("series")
    if isinstance(series, SeriesReport):
        writer.write_json("series", series.to_dict())
        writer.write_csv("series", series.rows(), SeriesReport.CSV_COLUMNS)
    for check in report["checks"]:
        if not check["success"]:
            logger.error("FAILED %s/%s: %s", check["suite"], check["name"], check.get("error") or check.get("message"))
    logger.info("Verification %s: %d passed, %d failed", report["status"], report["passed"], report["failed"])
    return report["exit_code"]


class LabOrchestrator:
    """One orchestrator per invocation; every artifact goes below ``cfg.output_dir``."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out_dir = Path(cfg.output_dir)
        self.writer = ReportWriter(self.out_dir, cfg.provenance())

    def trees(self, n_max: int, k_max: int) -> int:
        self.writer.write_catalogs(n_max, k_max)
        return 0

    def verify(self, suites: Optional[Sequence[str]] = None) -> int:
        return run_verify(self.cfg.model_dump(), suites)

    def _write_series(self, report: SeriesReport, suffix: str = "") -> None:
        self.writer.write_json(f"series{suffix}", report.to_dict())
        self.writer.write_csv(f"series{suffix}", report.rows(), SeriesReport.CSV_COLUMNS)

    def series(self) -> int:
        ctx = SuiteContext.from_config(self.cfg)
        failures = 0
        for t in self.cfg.times:
            etd = solve_etd(ctx.u0, t, ctx.solver_config())
            picard = solve_picard(ctx.u0, t, ctx.solver_config("picard"))
            agreement = l2_norm(etd.final_field - picard.final_field) / l2_norm(picard.final_field)
            report, _ = solution_series(
                ctx.u0, t, self.cfg.series_max_order, ctx.q,
                reference=picard.final_field, reference_agreement=agreement,
                dealias=self.cfg.dealias, jobs=self.cfg.jobs,
            )
            self._write_series(report, f"_t{t:g}")
            failures += report.non_decay
        return 1 if failures else 0

    def kernelcheck(self) -> int:
        ctx = SuiteContext.from_config(self.cfg)
        results = kernel_suite(ctx)
        cases = ctx.artifacts["kernel_cases"]
        self.writer.write_json("kernel_report", {"cases": cases})
        self.writer.write_csv("kernel_report", cases, KERNEL_COLUMNS)
        return 0 if all(r.success for r in results) else 1

    def solve(self) -> int:
        ctx = SuiteContext.from_config(self.cfg)
        store = SnapshotStore(self.out_dir / "snapshots")
        rows: List[Dict[str, Any]] = []
        store.save_field(ctx.u0, "initial", self.cfg.provenance())
        for t in self.cfg.times:
            for integrator, solver in (("etd_rk2", solve_etd), ("picard", solve_picard)):
                result = solver(ctx.u0, t, ctx.solver_config(integrator))
                name = f"{integrator}_t{t:g}"
                store.save_field(result.final_field, name, self.cfg.provenance())
                store.save_trajectory(result.trajectory, f"{name}_trajectory", self.cfg.provenance(),
                                      [result.error_estimate])
                rows.append({
                    "integrator": integrator,
                    "t_final": t,
                    "steps": result.steps,
                    "dt": result.dt,
                    "sweeps": result.sweeps,
                    "error_estimate": result.error_estimate,
                    "energy_defect": result.energy_defect,
                    "contraction_ratio": result.contraction_ratio,
                    "l2_norm": l2_norm(result.final_field),
                    "seconds": result.seconds,
                })
        self.writer.write_json("solve_report", {"runs": rows})
        self.writer.write_csv("solve_report", rows, SOLVE_COLUMNS)
        return 0

    def scalingcheck(self) -> int:
        results = scaling_suite(SuiteContext.from_config(self.cfg))
        checks = [r.to_dict() for r in results]
        self.writer.write_json("scaling_report", {"checks": checks})
        self.writer.write_csv("scaling_report", checks, CHECK_COLUMNS)
        return 0 if all(r.success for r in results) else 1

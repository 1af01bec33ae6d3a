"""
Acceptance suites of a verification run.

Every suite takes a SuiteContext and returns CheckResults. A check never
raises: an exception inside it becomes a failed result carrying the error.
"""

import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from config.settings import settings
from models.field_models import GridSpec, SpectralVectorField
from models.kernel_models import TauQuadrature
from models.report_models import CheckResult
from models.run_models import RunConfig
from models.solver_models import SolverConfig
from models.tensor_models import SimplexQuadrature
from tools.frequency_kernel import validation_cases
from tools.hierarchy import collapse, consistency_check, duhamel_term_direct
from tools.interaction import vertex_bilinear
from tools.reference_solver import measure_etd_order, residual_mild, solve_etd, solve_picard
from tools.spectral_ops import (
    compressible_fixture,
    gradient,
    heat_propagate,
    inner_product,
    l2_norm,
    leray_project,
    max_divergence,
    random_divfree,
    single_mode,
    sobolev_norm,
    taylor_green,
)
from tools.tree_enumerator import (
    canonical_string,
    catalan,
    enumerate_forests,
    enumerate_trees,
    forest_bound,
    forest_count,
    parse_canonical,
    surgery_preimages,
    surgery_remove_root_vertex,
)
from tools.tree_expansion import (
    refinement_estimate,
    remainder_probe,
    scaling_invariance_check,
    solution_series,
    tree_sum_with_estimate,
)
from utils.logger import setup_logger

logger = setup_logger(__name__)

CATALAN = (1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796)
OPERATOR_SAMPLES = 100
CONSISTENCY_SAMPLES = 20
EQUIVALENCE_LIMITS = {1: 1e-6, 2: 1e-6, 3: 1e-5}
PROBE_ORDERS = (1, 2)
SURGERY_MAX = 3


@dataclass
class SuiteContext:
    """Inputs shared by every suite of one run, plus artifacts they leave behind."""
    cfg: RunConfig
    u0: SpectralVectorField
    q: SimplexQuadrature
    tau: TauQuadrature
    artifacts: Dict[str, Any] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "SuiteContext":
        return cls(cfg, initial_field(cfg), quadrature(cfg), tau_quadrature(cfg))

    @property
    def t(self) -> float:
        return self.cfg.times[0]

    def solver_config(self, integrator: str = "etd_rk2", **overrides) -> SolverConfig:
        options = dict(
            dt=self.cfg.solver_dt,
            integrator=integrator,
            dealias=self.cfg.dealias,
            oracle=True,
            picard_nodes=settings.PICARD_NODES,
            picard_inner_nodes=settings.PICARD_INNER_NODES,
            max_sweeps=settings.PICARD_MAX_SWEEPS,
            tolerance=settings.PICARD_TOLERANCE,
            cfl_limit=settings.CFL_LIMIT,
            blowup_factor=settings.BLOWUP_FACTOR,
        )
        options.update(overrides)
        return SolverConfig(**options)


def initial_field(cfg: RunConfig) -> SpectralVectorField:
    grid = GridSpec(cfg.grid_n)
    if cfg.initial_kind == "random":
        return random_divfree(cfg.seed, cfg.decay, grid, cfg.amplitude)
    return taylor_green(cfg.amplitude, grid)


def quadrature(cfg: RunConfig) -> SimplexQuadrature:
    return SimplexQuadrature(cfg.quad_scheme, cfg.quad_nodes, cfg.quad_refined_nodes)


def tau_quadrature(cfg: RunConfig) -> TauQuadrature:
    return TauQuadrature(
        t_max=cfg.tau_t_max,
        nodes=cfg.tau_nodes,
        compression=settings.TAU_COMPRESSION,
        inner_step=settings.TAU_INNER_STEP,
        inner_span=settings.TAU_INNER_SPAN,
        tail_terms=settings.TAU_TAIL_TERMS,
    )


def run_check(suite: str, name: str, fn: Callable[[], Tuple[float, float, bool, str]]) -> CheckResult:
    """Run one check; ``fn`` returns (measured, tolerance, success, message)."""
    started = time.perf_counter()
    try:
        measured, tolerance, success, message = fn()
        result = CheckResult(suite, name, bool(success), float(measured), float(tolerance), message)
    except Exception as exc:
        logger.error("Check %s/%s raised %s: %s", suite, name, type(exc).__name__, exc)
        result = CheckResult(suite, name, False, error=f"{type(exc).__name__}: {exc}")
    result.seconds = time.perf_counter() - started
    level = "passed" if result.success else "FAILED"
    logger.info("Check %s/%s %s (measured=%s, tolerance=%s)", suite, name, level, result.measured, result.tolerance)
    return result


def _below(measured: float, tolerance: float, message: str = "") -> Tuple[float, float, bool, str]:
    return measured, tolerance, bool(np.isfinite(measured) and measured < tolerance), message


def _exact(mismatches: int, message: str = "") -> Tuple[float, float, bool, str]:
    return float(mismatches), 0.0, mismatches == 0, message


def _relative(a: SpectralVectorField, b: SpectralVectorField) -> float:
    scale = l2_norm(b)
    diff = l2_norm(a - b)
    return diff / scale if scale else diff


def _random_general(rng: np.random.Generator, grid: GridSpec) -> SpectralVectorField:
    samples = rng.standard_normal(grid.vector_shape)
    return SpectralVectorField(grid, np.fft.fftn(samples, axes=(1, 2, 3)))


# Combinatorics

def combinatorics_suite(ctx: SuiteContext) -> List[CheckResult]:
    cfg = ctx.cfg

    def tree_counts():
        counts = [len(enumerate_trees(n)) for n in range(cfg.tree_n_max + 1)]
        bad = sum(1 for n, c in enumerate(counts) if c != catalan(n) or (n < len(CATALAN) and c != CATALAN[n]))
        return _exact(bad, f"counts {counts}")

    def forest_counts():
        bad = 0
        for k in range(1, cfg.forest_k_max + 1):
            for n in range(cfg.forest_n_max + 1):
                count = len(enumerate_forests(n, k))
                bad += count != forest_count(n, k) or count > forest_bound(n, k)
        return _exact(bad)

    def preimages():
        bad = 0
        n_max = min(SURGERY_MAX, cfg.forest_n_max)
        k_max = min(SURGERY_MAX, cfg.forest_k_max - 1)
        for k in range(1, k_max + 1):
            for n in range(1, n_max + 1):
                sources = enumerate_forests(n, k)
                images: Dict[str, int] = {}
                for f in sources:
                    for root in f.nontrivial_roots:
                        key = canonical_string(surgery_remove_root_vertex(f, root))
                        images[key] = images.get(key, 0) + 1
                for target in enumerate_forests(n - 1, k + 1):
                    pre = surgery_preimages(target)
                    bad += len(pre) != k or images.get(canonical_string(target), 0) != k
                    bad += sum(surgery_remove_root_vertex(f, r) != target for f, r in pre)
        return _exact(bad)

    def round_trip():
        bad = 0
        for k in range(1, min(SURGERY_MAX, cfg.forest_k_max) + 1):
            for n in range(min(SURGERY_MAX, cfg.forest_n_max) + 1):
                bad += sum(parse_canonical(canonical_string(f)) != f for f in enumerate_forests(n, k))
        return _exact(bad)

    return [
        run_check("combinatorics", "tree_counts", tree_counts),
        run_check("combinatorics", "forest_counts", forest_counts),
        run_check("combinatorics", "root_removal_preimages", preimages),
        run_check("combinatorics", "canonical_round_trip", round_trip),
    ]


# Field operators

def operators_suite(ctx: SuiteContext) -> List[CheckResult]:
    grid = ctx.u0.grid
    rng = np.random.default_rng(ctx.cfg.seed)
    samples = [_random_general(rng, grid) for _ in range(OPERATOR_SAMPLES)]
    partners = [_random_general(rng, grid) for _ in range(OPERATOR_SAMPLES)]

    def idempotent():
        worst = max(l2_norm(leray_project(leray_project(u)) - leray_project(u)) / l2_norm(u) for u in samples)
        return _below(worst, 1e-12)

    def self_adjoint():
        worst = max(
            abs(inner_product(leray_project(u), v) - inner_product(u, leray_project(v))) / (l2_norm(u) * l2_norm(v))
            for u, v in zip(samples, partners)
        )
        return _below(worst, 1e-12)

    def annihilates_gradients():
        worst = 0.0
        for u in samples[:10]:
            grad = gradient(u.coeffs[0], grid)
            worst = max(worst, l2_norm(leray_project(grad)) / l2_norm(grad))
        return _below(worst, 1e-12)

    def semigroup():
        worst = max(
            l2_norm(heat_propagate(heat_propagate(u, 0.01), 0.02) - heat_propagate(u, 0.03)) / l2_norm(u)
            for u in samples
        )
        return _below(worst, 1e-13)

    def contraction(alpha: float):
        def check():
            worst = max(
                (sobolev_norm(heat_propagate(u, 0.05), alpha) - sobolev_norm(u, alpha)) / sobolev_norm(u, alpha)
                for u in samples
            )
            return worst, 1e-13, worst <= 1e-13, ""
        return check

    def vertex_paths():
        small = GridSpec(8)
        a = random_divfree(ctx.cfg.seed, ctx.cfg.decay, small)
        b = random_divfree(ctx.cfg.seed + 1, ctx.cfg.decay, small)
        return _below(_relative(vertex_bilinear(a, b, "spectral"), vertex_bilinear(a, b, "pseudo")), 1e-12)

    def vertex_divergence():
        out = vertex_bilinear(ctx.u0, ctx.u0)
        return _below(max_divergence(out), 1e-12)

    return [
        run_check("operators", "leray_idempotent", idempotent),
        run_check("operators", "leray_self_adjoint", self_adjoint),
        run_check("operators", "leray_annihilates_gradients", annihilates_gradients),
        run_check("operators", "heat_semigroup", semigroup),
        *(run_check("operators", f"heat_contraction_h{alpha:+g}", contraction(alpha)) for alpha in (-1.0, 0.0, 1.0)),
        run_check("operators", "vertex_paths_agree", vertex_paths),
        run_check("operators", "vertex_divergence_free", vertex_divergence),
    ]


def consistency_suite(ctx: SuiteContext) -> List[CheckResult]:
    grid = ctx.u0.grid

    def divergence_free():
        worst = 0.0
        for i in range(CONSISTENCY_SAMPLES):
            u = random_divfree(ctx.cfg.seed + i, ctx.cfg.decay, grid)
            worst = max(worst, consistency_check(u) / l2_norm(u) ** 3)
        return _below(worst, 1e-10)

    def counterexample():
        u = compressible_fixture(grid)
        ratio = consistency_check(u) / l2_norm(u) ** 3
        return ratio, 1e-3, ratio > 1e-3, "must exceed the tolerance"

    return [
        run_check("consistency", "divergence_free_fields", divergence_free),
        run_check("consistency", "compressible_counterexample", counterexample),
    ]


# Reference solvers

def solver_fixtures(ctx: SuiteContext) -> Dict[str, SpectralVectorField]:
    """Taylor-Green, random divergence-free and a real single-mode shear field on the run grid."""
    with ctx.lock:
        if "solver_fixtures" not in ctx.artifacts:
            cfg = ctx.cfg
            grid = GridSpec(cfg.grid_n)
            half = (0.0, 0.5 * cfg.amplitude, 0.0)
            ctx.artifacts["solver_fixtures"] = {
                "taylor_green": taylor_green(cfg.amplitude, grid),
                "random_divfree": random_divfree(cfg.seed, cfg.decay, grid, cfg.amplitude),
                "single_mode": single_mode(grid, (1, 0, 0), half) + single_mode(grid, (-1, 0, 0), half),
            }
    return ctx.artifacts["solver_fixtures"]


def _references(ctx: SuiteContext, fixture: Optional[str] = None, t: Optional[float] = None):
    """ETD and Picard solutions of one fixture at time t, computed once per run."""
    t = ctx.t if t is None else t
    u0 = ctx.u0 if fixture is None else solver_fixtures(ctx)[fixture]
    key = (fixture or "initial", t)
    with ctx.lock:
        cache = ctx.artifacts.setdefault("references", {})
        if key not in cache:
            etd = solve_etd(u0, t, ctx.solver_config())
            picard = solve_picard(u0, t, ctx.solver_config("picard"))
            cache[key] = (etd, picard)
    return cache[key]


def solvers_suite(ctx: SuiteContext) -> List[CheckResult]:
    def agreement(fixture: str, t: float):
        etd, picard = _references(ctx, fixture, t)
        return _below(_relative(etd.final_field, picard.final_field), 1e-6)

    def etd_order():
        cfg = ctx.solver_config(dt=0.01, estimate_error=False)
        order = measure_etd_order(ctx.u0, 0.1, 0.01, cfg)
        return abs(order - 2.0), 0.2, abs(order - 2.0) <= 0.2, f"order {order:.3f}"

    def mild_residual(fixture: str, t: float):
        u0 = solver_fixtures(ctx)[fixture]
        _, picard = _references(ctx, fixture, t)
        residual = residual_mild(picard.final_field, u0, t, trajectory=picard.trajectory)
        return _below(residual / l2_norm(u0), 1e-8)

    results = []
    for fixture in solver_fixtures(ctx):
        for t in ctx.cfg.times:
            results.append(run_check(
                "solvers", f"etd_picard_agreement_{fixture}_t{t:g}",
                lambda fixture=fixture, t=t: agreement(fixture, t),
            ))
            results.append(run_check(
                "solvers", f"picard_mild_residual_{fixture}_t{t:g}",
                lambda fixture=fixture, t=t: mild_residual(fixture, t),
            ))
    results.append(run_check("solvers", "etd_order", etd_order))
    return results


# Time-domain expansion

def equivalence_suite(ctx: SuiteContext) -> List[CheckResult]:
    results = []
    for n in range(1, ctx.cfg.equivalence_max_order + 1):
        def check(n=n):
            trees, tree_est = tree_sum_with_estimate(n, ctx.t, ctx.u0, ctx.q, ctx.cfg.dealias)

            def direct(rule):
                return collapse(duhamel_term_direct(n, 1, ctx.t, ctx.u0, rule, ctx.cfg.dealias, jobs=1))

            oracle = direct(ctx.q)
            oracle_est = refinement_estimate(direct, ctx.q, oracle)
            diff = l2_norm(trees - oracle)
            limit = EQUIVALENCE_LIMITS.get(n, 1e-5)
            tolerance = min(limit, max(3.0 * (tree_est + oracle_est), 1e-12 * l2_norm(oracle)))
            return diff, tolerance, diff <= tolerance, f"estimates {tree_est:.2e} / {oracle_est:.2e}"
        results.append(run_check("equivalence", f"tree_sum_vs_direct_n{n}", check))
    return results


def series_suite(ctx: SuiteContext) -> List[CheckResult]:
    outcome: Dict[str, Any] = {}

    def run_series():
        if "series" not in outcome:
            etd, picard = _references(ctx)
            agreement = _relative(etd.final_field, picard.final_field)
            report, _ = solution_series(
                ctx.u0, ctx.t, ctx.cfg.series_max_order, ctx.q,
                reference=picard.final_field, reference_agreement=agreement,
                dealias=ctx.cfg.dealias, jobs=1,
            )
            outcome["series"] = report
            ctx.artifacts["series"] = report
        return outcome["series"]

    def error():
        report = run_series()
        return _below(report.cum_error_vs_ref[-1], 1e-4)

    def ratio():
        report = run_series()
        value = report.geometric_ratio if report.geometric_ratio is not None else float("nan")
        return _below(value, 0.5)

    def decay():
        report = run_series()
        return float(report.non_decay), 0.0, not report.non_decay, ""

    return [
        run_check("series", "partial_sum_vs_reference", error),
        run_check("series", "geometric_ratio", ratio),
        run_check("series", "monotone_decay", decay),
    ]


def scaling_suite(ctx: SuiteContext) -> List[CheckResult]:
    lam = ctx.cfg.scaling_lambda

    def solver():
        return _below(scaling_invariance_check(ctx.u0, lam, ctx.t, "solver", ctx.cfg.solver_dt), 5e-6)

    def series():
        return _below(scaling_invariance_check(ctx.u0, lam, ctx.t, "series", max_order=3, q=ctx.q), 1e-4)

    return [
        run_check("scaling", f"solver_lambda{lam}", solver),
        run_check("scaling", f"series_lambda{lam}", series),
    ]


def probe_suite(ctx: SuiteContext) -> List[CheckResult]:
    references: Dict[float, SpectralVectorField] = {}

    def reference(t: float) -> SpectralVectorField:
        if t not in references:
            references[t] = solve_picard(ctx.u0, t, ctx.solver_config("picard")).final_field
        return references[t]

    results = []
    for n in PROBE_ORDERS:
        def check(n=n):
            probe = remainder_probe(n, ctx.cfg.probe_times, ctx.u0, ctx.q, reference)
            ctx.artifacts[f"probe_n{n}"] = probe
            margin = probe.bound_slope - probe.slope
            return margin, 0.2, probe.consistent, f"slope {probe.slope:.3f} +/- {probe.band:.3f}"
        results.append(run_check("probe", f"remainder_slope_n{n}", check))
    return results


def kernel_suite(ctx: SuiteContext) -> List[CheckResult]:
    cases = validation_cases(ctx.tau)
    ctx.artifacts["kernel_cases"] = cases
    return [
        CheckResult(
            "kernel",
            case["name"],
            bool(case.get("success")),
            case.get("residual"),
            case.get("tolerance"),
            error=case.get("error"),
        )
        for case in cases
    ]


SUITES: Dict[str, Callable[[SuiteContext], List[CheckResult]]] = {
    "combinatorics": combinatorics_suite,
    "operators": operators_suite,
    "consistency": consistency_suite,
    "solvers": solvers_suite,
    "equivalence": equivalence_suite,
    "series": series_suite,
    "scaling": scaling_suite,
    "probe": probe_suite,
    "kernel": kernel_suite,
}


def run_suite(name: str, ctx: SuiteContext) -> List[CheckResult]:
    """Run a named suite; a failure outside any check is reported as one failed result."""
    started = time.perf_counter()
    try:
        results = SUITES[name](ctx)
    except Exception as exc:
        logger.error("Suite %s aborted: %s", name, exc)
        results = [CheckResult(name, "suite", False, error=f"{type(exc).__name__}: {exc}")]
    logger.info("Suite %s finished in %.1fs", name, time.perf_counter() - started)
    return results

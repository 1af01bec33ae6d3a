"""LangGraph workflow for a verification run."""

import operator
from typing import Annotated, Any, Dict, List, Optional, Sequence, TypedDict

from langgraph.graph import END, StateGraph

from models.report_models import CheckResult
from models.run_models import RunConfig
from pipeline.suites import SUITES, SuiteContext, run_suite
from utils.logger import setup_logger
from utils.numerics import bounded_map

logger = setup_logger(__name__)


class VerifyState(TypedDict):
    """State for the verification workflow"""
    raw_config: Dict[str, Any]
    config: Optional[RunConfig]
    valid: bool
    suites: List[str]
    results: Annotated[List[CheckResult], operator.add]
    reasoning: Annotated[List[str], operator.add]
    artifacts: Dict[str, Any]
    report: Dict[str, Any]


class VerificationWorkflow:
    """validate_config -> run_suites -> assemble_report, skipping the suites for an invalid config."""

    def __init__(self, suites: Optional[Sequence[str]] = None):
        unknown = [name for name in (suites or []) if name not in SUITES]
        if unknown:
            raise ValueError(f"unknown suites {unknown}; available: {sorted(SUITES)}")
        self.suites = list(suites) if suites else list(SUITES)
        self.app = self._build_graph()

    def _build_graph(self):
        workflow = StateGraph(VerifyState)

        workflow.add_node("validate_config", self._validate_config)
        workflow.add_node("run_suites", self._run_suites)
        workflow.add_node("assemble_report", self._assemble_report)

        workflow.set_entry_point("validate_config")
        workflow.add_conditional_edges(
            "validate_config",
            lambda state: "run_suites" if state.get("valid") else "assemble_report",
        )
        workflow.add_edge("run_suites", "assemble_report")
        workflow.add_edge("assemble_report", END)

        return workflow.compile()

    def _validate_config(self, state: VerifyState) -> Dict[str, Any]:
        try:
            cfg = RunConfig.model_validate(state["raw_config"])
        except ValueError as exc:
            logger.warning("Refusing run: %s", exc)
            return {
                "valid": False,
                "config": None,
                "reasoning": [f"Invalid configuration: {exc}"],
            }
        return {"valid": True, "config": cfg, "reasoning": ["Configuration validated."]}

    def _run_suites(self, state: VerifyState) -> Dict[str, Any]:
        cfg = state["config"]
        ctx = SuiteContext.from_config(cfg)
        batches = bounded_map(lambda name: run_suite(name, ctx), state["suites"], cfg.jobs)
        results = [result for batch in batches for result in batch]
        return {
            "results": results,
            "artifacts": ctx.artifacts,
            "reasoning": [f"Ran {len(state['suites'])} suites with {len(results)} checks."],
        }

    def _assemble_report(self, state: VerifyState) -> Dict[str, Any]:
        results = state.get("results", [])
        cfg = state.get("config")
        failed = [r for r in results if not r.success]
        if not state.get("valid"):
            status, exit_code = "invalid_config", 2
        elif failed or not results:
            status, exit_code = "failed", 1
        else:
            status, exit_code = "passed", 0
        report = {
            "status": status,
            "exit_code": exit_code,
            "suites": state["suites"],
            "passed": len(results) - len(failed),
            "failed": len(failed),
            "checks": [r.to_dict() for r in results],
            "reasoning": state.get("reasoning", []),
            "provenance": cfg.provenance() if cfg is not None else {"config": state["raw_config"]},
        }
        return {"report": report, "reasoning": [f"Verification {status}: {len(failed)} failed checks."]}

    def run(self, raw_config: Dict[str, Any]) -> VerifyState:
        initial_state: VerifyState = {
            "raw_config": dict(raw_config),
            "config": None,
            "valid": False,
            "suites": self.suites,
            "results": [],
            "reasoning": [],
            "artifacts": {},
            "report": {},
        }
        return self.app.invoke(initial_state)

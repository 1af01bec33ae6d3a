"""Verification workflow and subcommand orchestration."""

from .graph import VerificationWorkflow
from .orchestrator import LabOrchestrator

__all__ = ["VerificationWorkflow", "LabOrchestrator"]

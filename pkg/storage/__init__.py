"""Snapshot files and report artifacts."""

from .report_writer import ReportWriter
from .snapshot_store import SnapshotStore

__all__ = ["ReportWriter", "SnapshotStore"]

"""CSV and JSON artifacts of a run, each tagged with the run's provenance."""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from config.settings import settings
from tools.tree_enumerator import (
    canonical_string,
    catalan,
    enumerate_forests,
    enumerate_trees,
    forest_bound,
    forest_count,
)
from utils.logger import setup_logger

logger = setup_logger(__name__)

COUNT_COLUMNS = ("kind", "n", "k", "count", "formula", "bound")


def _plain(value: Any) -> Any:
    """JSON-safe copy: numpy scalars, complex numbers and paths become plain values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    return value


class ReportWriter:
    """Writes report files into one output directory."""

    def __init__(self, out_dir: Optional[Path] = None, provenance: Optional[Dict[str, Any]] = None):
        self.out_dir = Path(out_dir) if out_dir is not None else settings.get_output_dir()
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.provenance = provenance or {}
        self.written: List[Path] = []

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self.out_dir / f"{name}.json"
        document = {
            "schema_version": settings.REPORT_SCHEMA_VERSION,
            "code_version": settings.CODE_VERSION,
            "provenance": self.provenance,
            **payload,
        }
        path.write_text(json.dumps(_plain(document), indent=2), encoding="utf-8")
        self.written.append(path)
        logger.info("Wrote %s", path)
        return path

    def write_csv(self, name: str, rows: Iterable[Dict[str, Any]], columns: Sequence[str]) -> Path:
        path = self.out_dir / f"{name}.csv"
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(columns), extrasaction="ignore")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: ("" if v is None else _plain(v)) for k, v in row.items()})
        self.written.append(path)
        logger.info("Wrote %s", path)
        return path

    def write_lines(self, name: str, lines: Iterable[str]) -> Path:
        path = self.out_dir / name
        path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
        self.written.append(path)
        return path

    def write_catalogs(self, n_max: int, k_max: int) -> Path:
        """
        Canonical-string catalogs of trees and forests plus counts.csv.

        Trees are listed for n <= n_max; forests for 1 <= k <= k_max and
        n <= n_max. Each count row carries the closed formula and the
        2^(3n+k) bound. Re-running yields byte-identical files.

        Raises:
            CapExceededError: If n_max or k_max exceeds the enumeration caps;
                nothing is written in that case
        """
        catalogs, rows = [], []
        for n in range(n_max + 1):
            trees = enumerate_trees(n)
            catalogs.append((f"trees_n{n}.txt", [canonical_string(t) for t in trees]))
            rows.append({"kind": "tree", "n": n, "k": 1, "count": len(trees),
                         "formula": catalan(n), "bound": forest_bound(n, 1)})
        for k in range(1, k_max + 1):
            for n in range(n_max + 1):
                forests = enumerate_forests(n, k)
                catalogs.append((f"forests_n{n}_k{k}.txt", [canonical_string(f) for f in forests]))
                rows.append({"kind": "forest", "n": n, "k": k, "count": len(forests),
                             "formula": forest_count(n, k), "bound": forest_bound(n, k)})
        for name, lines in catalogs:
            self.write_lines(name, lines)
        return self.write_csv("counts", rows, COUNT_COLUMNS)

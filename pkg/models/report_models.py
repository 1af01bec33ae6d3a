"""Report records for verification checks, series runs and probes."""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class CheckResult:
    """One executed check: measured value against its tolerance."""
    suite: str
    name: str
    success: bool
    measured: Optional[float] = None
    tolerance: Optional[float] = None
    message: str = ""
    error: Optional[str] = None
    seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SeriesReport:
    """Per-order norms and errors of the truncated solution series."""
    t: float
    orders: List[int] = field(default_factory=list)
    term_l2: List[float] = field(default_factory=list)
    term_hneg2: List[float] = field(default_factory=list)
    cum_error_vs_ref: List[Optional[float]] = field(default_factory=list)
    seconds: List[float] = field(default_factory=list)
    geometric_ratio: Optional[float] = None
    non_decay: bool = False
    reference_agreement: Optional[float] = None

    CSV_COLUMNS = ("order", "term_l2", "term_hneg2", "cum_error_vs_ref", "seconds")

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "order": n,
                "term_l2": l2,
                "term_hneg2": hm2,
                "cum_error_vs_ref": err,
                "seconds": sec,
            }
            for n, l2, hm2, err, sec in zip(
                self.orders, self.term_l2, self.term_hneg2, self.cum_error_vs_ref, self.seconds
            )
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "rows": self.rows(),
            "geometric_ratio": self.geometric_ratio,
            "non_decay": self.non_decay,
            "reference_agreement": self.reference_agreement,
        }


@dataclass
class ProbeResult:
    """Least-squares slope of log truncation error against log t."""
    order: int
    times: List[float]
    errors: List[float]
    slope: float
    band: float
    bound_slope: float

    @property
    def consistent(self) -> bool:
        """One-sided check: decay at least as fast as the bound, less 0.2."""
        return self.slope >= self.bound_slope - 0.2

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["consistent"] = self.consistent
        return data

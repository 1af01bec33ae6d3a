"""Core data models for the tree-expansion laboratory."""

from .errors import (
    BlowUpError,
    CapExceededError,
    DegenerateFitError,
    GridMismatchError,
    InvalidParameterError,
    LabError,
    MissingTrajectoryError,
    NonContractionError,
    QuadratureError,
    SmallTimeViolation,
    SnapshotFormatError,
    StabilityError,
)
from .field_models import GridSpec, SpectralVectorField, WaveVector
from .kernel_models import GammaAssignment, KernelValue, MomentumAssignment, TauQuadrature
from .report_models import CheckResult, ProbeResult, SeriesReport
from .run_models import RunConfig
from .solver_models import SolveResult, SolverConfig, Trajectory
from .tensor_models import LowRankTensorField, RankOneTerm, SimplexQuadrature
from .tree_models import LEAF, EdgeRef, Forest, LeafLabeling, MarkedBinaryTree, vertex

__all__ = [
    "BlowUpError",
    "CapExceededError",
    "DegenerateFitError",
    "GridMismatchError",
    "InvalidParameterError",
    "LabError",
    "MissingTrajectoryError",
    "NonContractionError",
    "QuadratureError",
    "SmallTimeViolation",
    "SnapshotFormatError",
    "StabilityError",
    "GridSpec",
    "SpectralVectorField",
    "WaveVector",
    "GammaAssignment",
    "KernelValue",
    "MomentumAssignment",
    "TauQuadrature",
    "CheckResult",
    "ProbeResult",
    "SeriesReport",
    "RunConfig",
    "SolveResult",
    "SolverConfig",
    "Trajectory",
    "LowRankTensorField",
    "RankOneTerm",
    "SimplexQuadrature",
    "LEAF",
    "EdgeRef",
    "Forest",
    "LeafLabeling",
    "MarkedBinaryTree",
    "vertex",
]

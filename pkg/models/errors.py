"""Exception types raised by the laboratory components.

All of them derive from ValueError so callers that only guard against bad
parameters keep working.
"""


class LabError(ValueError):
    """Base class for precondition and numerical failures."""


class CapExceededError(LabError):
    """A request exceeds a configured enumeration or cost cap."""


class GridMismatchError(LabError):
    """Operands live on different grids or have inconsistent shapes."""


class InvalidParameterError(LabError):
    """A parameter is outside its documented domain."""


class QuadratureError(LabError):
    """A quadrature self-estimate exceeds its tolerance."""


class NonContractionError(LabError):
    """Fixed-point sweeps stopped contracting."""


class BlowUpError(LabError):
    """The solution norm grew beyond the blow-up guard."""


class StabilityError(LabError):
    """The requested time step violates the stability budget."""


class SmallTimeViolation(LabError):
    """The series is evaluated outside the small-time regime."""


class DegenerateFitError(LabError):
    """Too few usable points for a least-squares fit."""


class MissingTrajectoryError(LabError):
    """A stored trajectory is required but was not supplied."""


class SnapshotFormatError(LabError):
    """A snapshot file is malformed or has an unknown version."""

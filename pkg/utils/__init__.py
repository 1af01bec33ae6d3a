"""Utility functions package."""

from .logger import setup_logger
from .numerics import bounded_map, pairwise_sum
from .validators import (
    validate_integer,
    validate_nonnegative,
    validate_number,
    validate_positive,
)

__all__ = [
    "setup_logger",
    "bounded_map",
    "pairwise_sum",
    "validate_integer",
    "validate_nonnegative",
    "validate_number",
    "validate_positive",
]

"""
Validation functions for numeric parameters.
"""

from numbers import Integral, Real
from typing import Union

Number = Union[int, float]


def validate_number(value: Number, name: str = "value") -> None:
    """
    Validate that a value is a real number.

    Args:
        value: Value to validate
        name: Parameter name used in the error message

    Raises:
        TypeError: If value is not a number
    """
    if isinstance(value, bool) or not isinstance(value, Real):
        raise TypeError(f"Expected number for {name}, got {type(value).__name__}")


def validate_integer(value: int, name: str = "value") -> None:
    """Raise TypeError unless value is an integer."""
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise TypeError(f"Expected integer for {name}, got {type(value).__name__}")


def validate_positive(value: Number, name: str = "value") -> None:
    """
    Validate that a number is positive.

    Raises:
        ValueError: If value is not positive
    """
    validate_number(value, name)
    if value <= 0:
        raise ValueError(f"Expected positive {name}, got {value}")


def validate_nonnegative(value: Number, name: str = "value") -> None:
    """Raise ValueError if value is negative."""
    validate_number(value, name)
    if value < 0:
        raise ValueError(f"Expected nonnegative {name}, got {value}")

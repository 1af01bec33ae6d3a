"""Low-rank k-particle tensor fields and the time-simplex quadrature rule."""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from models.errors import GridMismatchError, InvalidParameterError
from models.field_models import GridSpec, SpectralVectorField

QUADRATURE_SCHEMES = ("gauss_legendre", "uniform")


@dataclass(frozen=True)
class RankOneTerm:
    """coefficient * (factors[0] x ... x factors[k-1]); path records the slot merges."""
    coefficient: complex
    factors: Tuple[SpectralVectorField, ...]
    path: Tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return len(self.factors)


@dataclass
class LowRankTensorField:
    """A k-particle tensor field stored as a sum of rank-one terms."""
    order: int
    grid: GridSpec
    terms: List[RankOneTerm] = field(default_factory=list)

    def __post_init__(self):
        if self.order < 1:
            raise InvalidParameterError(f"tensor order must be positive, got {self.order}")
        for term in self.terms:
            self._check_term(term)

    def _check_term(self, term: RankOneTerm) -> None:
        if term.order != self.order:
            raise GridMismatchError(f"term of order {term.order} in a tensor of order {self.order}")
        for factor in term.factors:
            if factor.grid != self.grid:
                raise GridMismatchError("all factors must share one grid")

    def add_term(self, term: RankOneTerm) -> None:
        self._check_term(term)
        self.terms.append(term)

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @property
    def path_count(self) -> int:
        """Number of distinct slot-merge histories among the terms."""
        return len({term.path for term in self.terms})

    def __add__(self, other: "LowRankTensorField") -> "LowRankTensorField":
        if other.order != self.order or other.grid != self.grid:
            raise GridMismatchError("tensor sum needs equal order and grid")
        return LowRankTensorField(self.order, self.grid, self.terms + other.terms)

    def scaled(self, scalar: complex) -> "LowRankTensorField":
        return LowRankTensorField(
            self.order,
            self.grid,
            [RankOneTerm(scalar * t.coefficient, t.factors, t.path) for t in self.terms],
        )


@lru_cache(maxsize=64)
def _gauss_legendre(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class SimplexQuadrature:
    """
    One-dimensional rule applied at every nesting level of an iterated time
    integral. ``refinement`` is the node count used for error estimates.
    """
    scheme: str = "gauss_legendre"
    nodes: int = 8
    refinement: int = 12

    def __post_init__(self):
        if self.scheme not in QUADRATURE_SCHEMES:
            raise InvalidParameterError(f"unknown quadrature scheme {self.scheme!r}")
        if self.nodes < 2:
            raise InvalidParameterError(f"need at least 2 nodes per level, got {self.nodes}")
        if self.refinement < 2:
            raise InvalidParameterError(f"refinement must be at least 2, got {self.refinement}")

    def rule(self, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights on [a, b]."""
        half = 0.5 * (b - a)
        if self.scheme == "gauss_legendre":
            x, w = _gauss_legendre(self.nodes)
        else:
            x = -1.0 + (2.0 * np.arange(self.nodes) + 1.0) / self.nodes
            w = np.full(self.nodes, 2.0 / self.nodes)
        return a + half * (x + 1.0), half * w

    def refined(self) -> "SimplexQuadrature":
        """The rule used to estimate this rule's error."""
        finer = max(self.refinement, self.nodes + 1)
        return SimplexQuadrature(self.scheme, finer, finer + max(2, finer // 2))

"""Data models for the frequency-space kernel checks."""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from models.errors import InvalidParameterError
from models.field_models import WaveVector
from models.tree_models import MARKED, UNMARKED, MarkedBinaryTree

SUM_RULE_TOLERANCE = 1e-12


@dataclass
class GammaAssignment:
    """Strictly negative numbers on every edge of one tree, additive at vertices."""
    tree: MarkedBinaryTree
    values: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for path, node in self.tree.walk():
            if path not in self.values:
                raise InvalidParameterError(f"no gamma on edge {path or 'root'}")
            if not self.values[path] < 0:
                raise InvalidParameterError(f"gamma on edge {path or 'root'} must be negative")
            if not node.is_leaf:
                total = self.values[path + MARKED] + self.values[path + UNMARKED]
                if abs(self.values[path] - total) > SUM_RULE_TOLERANCE * abs(total):
                    raise InvalidParameterError(f"sum rule violated at vertex {path or 'root'}")

    @classmethod
    def from_leaves(cls, tree: MarkedBinaryTree, leaf_gammas: Sequence[float]) -> "GammaAssignment":
        """Leaf values in depth-first leaf order determine all others."""
        if len(leaf_gammas) != tree.leaf_count:
            raise InvalidParameterError(
                f"tree has {tree.leaf_count} leaves, got {len(leaf_gammas)} gammas"
            )
        values = dict(zip(tree.leaf_paths, (float(g) for g in leaf_gammas)))
        for path in sorted(tree.vertex_paths, key=len, reverse=True):
            values[path] = values[path + MARKED] + values[path + UNMARKED]
        return cls(tree, values)

    def __getitem__(self, path: str) -> float:
        return self.values[path]


@dataclass
class MomentumAssignment:
    """Integer wavevectors on leaves; vertex momenta follow by conservation."""
    tree: MarkedBinaryTree
    values: Dict[str, WaveVector] = field(default_factory=dict)

    @classmethod
    def from_leaves(cls, tree: MarkedBinaryTree, leaf_momenta: Sequence[WaveVector]) -> "MomentumAssignment":
        if len(leaf_momenta) != tree.leaf_count:
            raise InvalidParameterError(
                f"tree has {tree.leaf_count} leaves, got {len(leaf_momenta)} momenta"
            )
        values = {path: tuple(int(c) for c in q) for path, q in zip(tree.leaf_paths, leaf_momenta)}
        for path in sorted(tree.vertex_paths, key=len, reverse=True):
            a, b = values[path + MARKED], values[path + UNMARKED]
            values[path] = tuple(x + y for x, y in zip(a, b))
        return cls(tree, values)

    @property
    def root(self) -> WaveVector:
        return self.values[""]

    @property
    def constraint_count(self) -> int:
        return len(self.tree.vertex_paths)

    def leaf_momenta(self):
        return [self.values[path] for path in self.tree.leaf_paths]

    def norm_squared(self, path: str) -> int:
        return sum(c * c for c in self.values[path])


@dataclass(frozen=True)
class TauQuadrature:
    """
    Root grid on [-t_max, t_max] (tanh-compressed midpoints or uniform)
    plus the sinh grid used for the inner convolutions.
    """
    t_max: float = 200.0
    nodes: int = 20000
    scheme: str = "tanh"
    compression: float = 2.0
    inner_step: float = 0.003
    inner_span: float = 20.0
    inner_scale: float = 1.0
    tail_terms: int = 3

    def __post_init__(self):
        if self.t_max <= 0:
            raise InvalidParameterError(f"t_max must be positive, got {self.t_max}")
        if self.nodes < 4 or self.nodes % 2:
            raise InvalidParameterError(f"node count must be even and at least 4, got {self.nodes}")
        if self.scheme not in ("tanh", "uniform"):
            raise InvalidParameterError(f"unknown tau scheme {self.scheme!r}")
        if self.inner_step <= 0 or self.inner_span <= 0 or self.inner_scale <= 0:
            raise InvalidParameterError("inner grid parameters must be positive")
        if self.tail_terms < 1:
            raise InvalidParameterError("at least one tail term is required")

    def root_grid(self, nodes: Optional[int] = None, t_max: Optional[float] = None):
        """Nodes and weights of the truncated root integral."""
        n = nodes or self.nodes
        T = t_max or self.t_max
        x = -1.0 + (2.0 * np.arange(n) + 1.0) / n
        if self.scheme == "uniform":
            return T * x, np.full(n, 2.0 * T / n)
        c = self.compression
        th = np.tanh(c)
        tau = T * np.arctanh(x * th) / c
        jac = T * th / (c * (1.0 - (x * th) ** 2))
        return tau, jac * (2.0 / n)

    def inner_grid(self):
        """Sinh-mapped trapezoid nodes for integrals over the whole line."""
        xi = np.arange(-self.inner_span, self.inner_span + 0.5 * self.inner_step, self.inner_step)
        L = self.inner_scale
        return L * np.sinh(xi), self.inner_step * L * np.cosh(xi)

    def with_t_max(self, t_max: float) -> "TauQuadrature":
        return TauQuadrature(
            t_max, self.nodes, self.scheme, self.compression,
            self.inner_step, self.inner_span, self.inner_scale, self.tail_terms,
        )


@dataclass
class KernelValue:
    """Kernel scalar, the vector after the vertex factors, and its error bookkeeping."""
    scalar: complex
    vector: Optional[np.ndarray] = None
    output_momentum: Optional[WaveVector] = None
    truncation_estimate: float = 0.0
    tail_bound: float = 0.0
    t_max: float = 0.0

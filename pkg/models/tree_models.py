"""Marked binary trees, forests and edge addresses."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional, Tuple

MARKED = "m"
UNMARKED = "u"


@dataclass(frozen=True)
class MarkedBinaryTree:
    """
    A leaf (both daughters None) or a vertex with a marked and an unmarked
    daughter. Every node owns its mother edge; the root edge sits on top.
    """
    marked: Optional["MarkedBinaryTree"] = None
    unmarked: Optional["MarkedBinaryTree"] = None

    def __post_init__(self):
        if (self.marked is None) != (self.unmarked is None):
            raise ValueError("a vertex needs both a marked and an unmarked daughter")

    @property
    def is_leaf(self) -> bool:
        return self.marked is None

    @cached_property
    def vertex_count(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + self.marked.vertex_count + self.unmarked.vertex_count

    @property
    def leaf_count(self) -> int:
        return self.vertex_count + 1

    @property
    def edge_count(self) -> int:
        return 2 * self.vertex_count + 1

    @cached_property
    def sort_key(self) -> tuple:
        """(vertex count, marked key, unmarked key); a leaf sorts first."""
        if self.is_leaf:
            return (0,)
        return (self.vertex_count, self.marked.sort_key, self.unmarked.sort_key)

    @cached_property
    def canonical(self) -> str:
        if self.is_leaf:
            return "."
        return f"({self.marked.canonical}|{self.unmarked.canonical})"

    def subtree(self, path: str) -> "MarkedBinaryTree":
        """Follow a path of 'm'/'u' steps from this node."""
        node = self
        for step in path:
            if node.is_leaf:
                raise KeyError(f"path {path!r} runs past a leaf")
            if step == MARKED:
                node = node.marked
            elif step == UNMARKED:
                node = node.unmarked
            else:
                raise KeyError(f"invalid step {step!r} in path {path!r}")
        return node

    def walk(self, prefix: str = ""):
        """Yield (path, node) in depth-first order, marked branch first."""
        yield prefix, self
        if not self.is_leaf:
            yield from self.marked.walk(prefix + MARKED)
            yield from self.unmarked.walk(prefix + UNMARKED)

    @cached_property
    def leaf_paths(self) -> Tuple[str, ...]:
        return tuple(path for path, node in self.walk() if node.is_leaf)

    @cached_property
    def vertex_paths(self) -> Tuple[str, ...]:
        return tuple(path for path, node in self.walk() if not node.is_leaf)

    def __str__(self) -> str:
        return self.canonical


LEAF = MarkedBinaryTree()


def vertex(marked: MarkedBinaryTree, unmarked: MarkedBinaryTree) -> MarkedBinaryTree:
    """Build a vertex from its two daughters."""
    return MarkedBinaryTree(marked, unmarked)


@dataclass(frozen=True)
class EdgeRef:
    """Address of one edge: tree index in the forest plus the path from its root."""
    tree_index: int
    path: str = ""

    def child(self, step: str) -> "EdgeRef":
        return EdgeRef(self.tree_index, self.path + step)

    @property
    def depth(self) -> int:
        return len(self.path)

    def __str__(self) -> str:
        return f"{self.tree_index}:{self.path or '-'}"


@dataclass(frozen=True)
class Forest:
    """An ordered tuple of k marked binary trees."""
    trees: Tuple[MarkedBinaryTree, ...]

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        if not self.trees:
            raise ValueError("a forest has at least one tree")

    @property
    def k(self) -> int:
        return len(self.trees)

    @cached_property
    def n(self) -> int:
        return sum(t.vertex_count for t in self.trees)

    @property
    def trivial_roots(self) -> Tuple[EdgeRef, ...]:
        """R1: roots of trivial components."""
        return tuple(EdgeRef(j) for j, t in enumerate(self.trees) if t.is_leaf)

    @property
    def nontrivial_roots(self) -> Tuple[EdgeRef, ...]:
        """R2: roots of nontrivial components."""
        return tuple(EdgeRef(j) for j, t in enumerate(self.trees) if not t.is_leaf)

    @property
    def nontrivial_edge_count(self) -> int:
        """|E2|: edges belonging to nontrivial components."""
        return sum(t.edge_count for t in self.trees if not t.is_leaf)

    def tree_at(self, edge: EdgeRef) -> MarkedBinaryTree:
        if not 0 <= edge.tree_index < self.k:
            raise KeyError(f"tree index {edge.tree_index} outside forest of {self.k}")
        return self.trees[edge.tree_index].subtree(edge.path)

    @property
    def canonical(self) -> str:
        return ";".join(t.canonical for t in self.trees)

    def __str__(self) -> str:
        return self.canonical


@dataclass
class LeafLabeling:
    """A bijection from leaves to {1, ..., n+k} plus the root labeling."""
    leaf_labels: Dict[EdgeRef, int] = field(default_factory=dict)
    root_labels: Dict[EdgeRef, int] = field(default_factory=dict)

    def __post_init__(self):
        labels = sorted(self.leaf_labels.values())
        if labels != list(range(1, len(labels) + 1)):
            raise ValueError("leaf labels must be a bijection onto 1..n+k")

    def label_of(self, leaf: EdgeRef) -> int:
        return self.leaf_labels[leaf]

    def leaf_with_label(self, label: int) -> EdgeRef:
        for leaf, value in self.leaf_labels.items():
            if value == label:
                return leaf
        raise KeyError(f"no leaf carries label {label}")

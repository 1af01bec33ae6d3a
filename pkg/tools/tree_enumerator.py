"""Enumeration and surgery of marked binary trees and forests."""

from functools import lru_cache
from itertools import product
from math import comb
from typing import Dict, Iterator, List, Set, Tuple

from config.settings import settings
from models.errors import CapExceededError, InvalidParameterError
from models.tree_models import (
    LEAF,
    MARKED,
    UNMARKED,
    EdgeRef,
    Forest,
    LeafLabeling,
    MarkedBinaryTree,
    vertex,
)
from utils.logger import setup_logger
from utils.validators import validate_integer

logger = setup_logger(__name__)


def catalan(n: int) -> int:
    """
    The n-th Catalan number, (1/(n+1)) * binom(2n, n), computed exactly.

    Args:
        n: Nonnegative integer

    Returns:
        Number of marked binary trees with n vertices
    """
    validate_integer(n, "n")
    if n < 0:
        raise InvalidParameterError(f"catalan needs n >= 0, got {n}")
    return comb(2 * n, n) // (n + 1)


@lru_cache(maxsize=None)
def _trees(n: int) -> Tuple[MarkedBinaryTree, ...]:
    if n == 0:
        return (LEAF,)
    result = []
    # ascending marked size, then marked order, then unmarked order
    for m in range(n):
        for marked in _trees(m):
            for unmarked in _trees(n - 1 - m):
                result.append(vertex(marked, unmarked))
    return tuple(result)


def enumerate_trees(n: int) -> List[MarkedBinaryTree]:
    """
    All inequivalent marked binary trees with n vertices in canonical order.

    Args:
        n: Vertex count, at most settings.TREE_CAP

    Returns:
        List of length catalan(n)

    Raises:
        CapExceededError: If n exceeds the configured cap
    """
    validate_integer(n, "n")
    if n < 0:
        raise InvalidParameterError(f"vertex count must be nonnegative, got {n}")
    if n > settings.TREE_CAP:
        raise CapExceededError(f"tree enumeration capped at n={settings.TREE_CAP}, got {n}")
    return list(_trees(n))


def _compositions(n: int, k: int) -> Iterator[Tuple[int, ...]]:
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def enumerate_forests(n: int, k: int) -> List[Forest]:
    """
    All forests of k trees with n vertices in total.

    Compositions (n_1, ..., n_k) are visited in lexicographic order and the
    trees of each slot in canonical order.

    Raises:
        CapExceededError: If n or k exceeds the configured caps
    """
    validate_integer(n, "n")
    validate_integer(k, "k")
    if n < 0 or k < 1:
        raise InvalidParameterError(f"forests need n >= 0 and k >= 1, got n={n}, k={k}")
    if n > settings.FOREST_N_CAP or k > settings.FOREST_K_CAP:
        raise CapExceededError(
            f"forest enumeration capped at n={settings.FOREST_N_CAP}, k={settings.FOREST_K_CAP}; "
            f"got n={n}, k={k}"
        )
    forests = []
    for sizes in _compositions(n, k):
        for trees in product(*(_trees(size) for size in sizes)):
            forests.append(Forest(trees))
    logger.debug("Enumerated %d forests for n=%d, k=%d", len(forests), n, k)
    return forests


def forest_count(n: int, k: int) -> int:
    """Sum over compositions of n into k parts of the product of Catalan numbers."""
    counts = [catalan(m) for m in range(n + 1)]
    table = [1] + [0] * n
    for _ in range(k):
        table = [sum(table[i] * counts[m - i] for i in range(m + 1)) for m in range(n + 1)]
    return table[n]


def forest_bound(n: int, k: int) -> int:
    return 2 ** (3 * n + k)


def as_forest(tree_or_forest) -> Forest:
    if isinstance(tree_or_forest, Forest):
        return tree_or_forest
    return Forest((tree_or_forest,))


def edges(f: Forest) -> List[EdgeRef]:
    """Every edge, tree by tree, depth-first with the marked branch first."""
    return [EdgeRef(j, path) for j, tree in enumerate(f.trees) for path, _ in tree.walk()]


def leaves(f: Forest) -> List[EdgeRef]:
    return [EdgeRef(j, path) for j, tree in enumerate(f.trees) for path in tree.leaf_paths]


def vertices(f: Forest) -> List[EdgeRef]:
    """Vertices, each named by its mother edge, ancestors before descendants."""
    return [EdgeRef(j, path) for j, tree in enumerate(f.trees) for path in tree.vertex_paths]


def vertex_order(f: Forest) -> List[EdgeRef]:
    """Vertices by tree, then depth: a linear extension of the partial order, roots first."""
    return sorted(vertices(f), key=lambda v: (v.tree_index, len(v.path), v.path))


def external_edges(f: Forest) -> List[EdgeRef]:
    """Roots followed by leaves; a trivial tree's single edge appears twice."""
    return [EdgeRef(j) for j in range(f.k)] + leaves(f)


def external_edge_count(f: Forest) -> int:
    return len(external_edges(f))


def _require_vertex(f: Forest, v: EdgeRef) -> MarkedBinaryTree:
    try:
        node = f.tree_at(v)
    except KeyError as exc:
        raise InvalidParameterError(f"edge {v} not in forest {f}") from exc
    if node.is_leaf:
        raise InvalidParameterError(f"edge {v} is a leaf, not a vertex")
    return node


def partial_order_leq(v: EdgeRef, w: EdgeRef, t) -> bool:
    """
    True iff v lies on the route from w to the root (reflexive).

    Args:
        v: First vertex
        w: Second vertex
        t: The tree (or forest) containing both
    """
    f = as_forest(t)
    _require_vertex(f, v)
    _require_vertex(f, w)
    return v.tree_index == w.tree_index and w.path.startswith(v.path)


def granddaughter(e: EdgeRef, f) -> EdgeRef:
    """The leaf reached from e by following marked daughter-edges only."""
    f = as_forest(f)
    try:
        node = f.tree_at(e)
    except KeyError as exc:
        raise InvalidParameterError(f"edge {e} not in forest {f}") from exc
    path = e.path
    while not node.is_leaf:
        node = node.marked
        path += MARKED
    return EdgeRef(e.tree_index, path)


def maximal_vertices(f) -> Set[EdgeRef]:
    """Vertices with no strict descendant vertex, i.e. both daughters are leaves."""
    f = as_forest(f)
    result = set()
    for v in vertices(f):
        node = f.tree_at(v)
        if node.marked.is_leaf and node.unmarked.is_leaf:
            result.add(v)
    return result


def _replace(tree: MarkedBinaryTree, path: str, new: MarkedBinaryTree) -> MarkedBinaryTree:
    if not path:
        return new
    if path[0] == MARKED:
        return vertex(_replace(tree.marked, path[1:], new), tree.unmarked)
    return vertex(tree.marked, _replace(tree.unmarked, path[1:], new))


def surgery_remove_root_vertex(f: Forest, root_edge: EdgeRef) -> Forest:
    """
    Remove the vertex under a nontrivial root.

    The marked daughter takes the root's slot and the unmarked daughter
    becomes tree k+1.

    Raises:
        InvalidParameterError: If root_edge is not a root or its tree is trivial
    """
    f = as_forest(f)
    if root_edge.path:
        raise InvalidParameterError(f"edge {root_edge} is not a root")
    node = _require_vertex(f, root_edge)
    trees = list(f.trees)
    trees[root_edge.tree_index] = node.marked
    trees.append(node.unmarked)
    return Forest(tuple(trees))


def surgery_preimages(target: Forest) -> List[Tuple[Forest, EdgeRef]]:
    """All (forest, root) pairs whose root removal yields target."""
    if target.k < 2:
        raise InvalidParameterError("a root-removal image has at least two trees")
    k = target.k - 1
    last = target.trees[-1]
    result = []
    for j in range(k):
        trees = list(target.trees[:k])
        trees[j] = vertex(trees[j], last)
        result.append((Forest(tuple(trees)), EdgeRef(j)))
    return result


def surgery_split_leaf(f: Forest, leaf: EdgeRef) -> Forest:
    """Split a leaf with a new vertex carrying two leaf daughters."""
    f = as_forest(f)
    try:
        node = f.tree_at(leaf)
    except KeyError as exc:
        raise InvalidParameterError(f"leaf {leaf} not found in forest {f}") from exc
    if not node.is_leaf:
        raise InvalidParameterError(f"edge {leaf} is not a leaf")
    trees = list(f.trees)
    trees[leaf.tree_index] = _replace(trees[leaf.tree_index], leaf.path, vertex(LEAF, LEAF))
    return Forest(tuple(trees))


def surgery_remove_maximal_vertex(f: Forest, v: EdgeRef) -> Forest:
    """Delete a maximal vertex together with its two leaf daughters."""
    f = as_forest(f)
    if v not in maximal_vertices(f):
        raise InvalidParameterError(f"vertex {v} is not maximal in {f}")
    trees = list(f.trees)
    trees[v.tree_index] = _replace(trees[v.tree_index], v.path, LEAF)
    return Forest(tuple(trees))


def canonical_string(f) -> str:
    """Leaf '.', vertex '(marked|unmarked)', trees joined by ';'."""
    return as_forest(f).canonical


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> InvalidParameterError:
        return InvalidParameterError(f"{message} at position {self.pos} in {self.text!r}")

    def expect(self, char: str) -> None:
        if self.pos >= len(self.text) or self.text[self.pos] != char:
            raise self.error(f"expected {char!r}")
        self.pos += 1

    def tree(self) -> MarkedBinaryTree:
        if self.pos >= len(self.text):
            raise self.error("unexpected end")
        char = self.text[self.pos]
        if char == ".":
            self.pos += 1
            return LEAF
        if char == "(":
            self.pos += 1
            marked = self.tree()
            self.expect("|")
            unmarked = self.tree()
            self.expect(")")
            return vertex(marked, unmarked)
        raise self.error(f"unexpected {char!r}")


def parse_tree(text: str) -> MarkedBinaryTree:
    parser = _Parser(text.strip())
    tree = parser.tree()
    if parser.pos != len(parser.text):
        raise parser.error("trailing characters")
    return tree


def parse_canonical(text: str) -> Forest:
    """Inverse of canonical_string."""
    parts = text.strip().split(";")
    return Forest(tuple(parse_tree(part) for part in parts))


def canonical_labeling(f) -> LeafLabeling:
    """
    The fixed leaf labeling: the granddaughter of root j gets label j, and
    the i-th vertex in ancestor-first order labels the granddaughter of its
    unmarked daughter with k+i.
    """
    f = as_forest(f)
    labels: Dict[EdgeRef, int] = {}
    for j in range(f.k):
        labels[granddaughter(EdgeRef(j), f)] = j + 1
    for i, v in enumerate(vertices(f), start=1):
        labels[granddaughter(v.child(UNMARKED), f)] = f.k + i
    roots = {EdgeRef(j): j + 1 for j in range(f.k)}
    return LeafLabeling(labels, roots)


def leaf_index(tree: MarkedBinaryTree, path: str) -> int:
    """Position of a leaf in depth-first leaf order."""
    return tree.leaf_paths.index(path)


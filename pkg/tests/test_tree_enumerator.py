"""
Unit tests for tree and forest enumeration and surgery.
"""

import unittest

from models.errors import CapExceededError, InvalidParameterError
from models.tree_models import LEAF, EdgeRef, Forest, vertex
from tools.tree_enumerator import (
    canonical_labeling,
    canonical_string,
    catalan,
    enumerate_forests,
    enumerate_trees,
    external_edge_count,
    forest_bound,
    forest_count,
    granddaughter,
    maximal_vertices,
    parse_canonical,
    partial_order_leq,
    surgery_preimages,
    surgery_remove_maximal_vertex,
    surgery_remove_root_vertex,
    surgery_split_leaf,
    vertex_order,
    vertices,
)


class TestTreeCounts(unittest.TestCase):
    """Test cases for tree enumeration."""

    def test_catalan_numbers(self):
        """Test the first Catalan numbers."""
        self.assertEqual([catalan(n) for n in range(7)], [1, 1, 2, 5, 14, 42, 132])

    def test_tree_counts_match_catalan(self):
        """Test that tree counts equal the Catalan numbers."""
        for n in range(7):
            self.assertEqual(len(enumerate_trees(n)), catalan(n))

    def test_trees_are_distinct(self):
        """Test that no tree is listed twice."""
        trees = enumerate_trees(5)
        self.assertEqual(len({canonical_string(t) for t in trees}), len(trees))

    def test_canonical_order(self):
        """Test the canonical order for two vertices."""
        self.assertEqual(
            [canonical_string(t) for t in enumerate_trees(2)],
            ["(.|(.|.))", "((.|.)|.)"],
        )

    def test_enumeration_is_deterministic(self):
        """Test that repeated enumeration yields the same list."""
        first = [canonical_string(t) for t in enumerate_trees(4)]
        second = [canonical_string(t) for t in enumerate_trees(4)]
        self.assertEqual(first, second)

    def test_cap_exceeded(self):
        """Test that enumeration beyond the cap is refused."""
        with self.assertRaises(CapExceededError):
            enumerate_trees(11)

    def test_negative_count_rejected(self):
        """Test that a negative vertex count is rejected."""
        with self.assertRaises(InvalidParameterError):
            enumerate_trees(-1)


class TestForests(unittest.TestCase):
    """Test cases for forest enumeration."""

    def test_two_tree_forests(self):
        """Test the forest counts 1, 2, 5 for k = 2."""
        self.assertEqual([len(enumerate_forests(n, 2)) for n in range(3)], [1, 2, 5])

    def test_counts_match_formula_and_bound(self):
        """Test forest counts against the convolution formula and the bound."""
        for k in range(1, 5):
            for n in range(5):
                count = len(enumerate_forests(n, k))
                self.assertEqual(count, forest_count(n, k))
                self.assertLessEqual(count, forest_bound(n, k))

    def test_external_edges_of_trivial_tree(self):
        """Test that the trivial tree's edge is counted twice."""
        self.assertEqual(external_edge_count(Forest((LEAF,))), 2)
        self.assertEqual(external_edge_count(Forest((vertex(LEAF, LEAF),))), 3)

    def test_forest_cap(self):
        """Test that forests beyond the caps are refused."""
        with self.assertRaises(CapExceededError):
            enumerate_forests(2, 5)


class TestSurgery(unittest.TestCase):
    """Test cases for surgery operations."""

    def setUp(self):
        """Set up test fixtures."""
        self.cherry = vertex(LEAF, LEAF)
        self.caterpillar = vertex(self.cherry, LEAF)

    def test_root_removal(self):
        """Test removing the root vertex of a caterpillar."""
        result = surgery_remove_root_vertex(Forest((self.caterpillar,)), EdgeRef(0))
        self.assertEqual(canonical_string(result), "(.|.);.")

    def test_root_removal_of_leaf_rejected(self):
        """Test that a trivial root cannot lose a vertex."""
        with self.assertRaises(InvalidParameterError):
            surgery_remove_root_vertex(Forest((LEAF, self.cherry)), EdgeRef(0))

    def test_preimages_count_and_inverse(self):
        """Test that every target has exactly k preimages, each mapping back."""
        for k in range(1, 4):
            for n in range(0, 3):
                for target in enumerate_forests(n, k + 1):
                    pre = surgery_preimages(target)
                    self.assertEqual(len(pre), k)
                    for forest, root in pre:
                        self.assertEqual(surgery_remove_root_vertex(forest, root), target)

    def test_split_then_remove(self):
        """Test that removing a split leaf's new vertex restores the forest."""
        forest = Forest((self.caterpillar, LEAF))
        for leaf_ref in [EdgeRef(0, "mm"), EdgeRef(0, "u"), EdgeRef(1)]:
            split = surgery_split_leaf(forest, leaf_ref)
            self.assertIn(leaf_ref, maximal_vertices(split))
            self.assertEqual(surgery_remove_maximal_vertex(split, leaf_ref), forest)

    def test_split_of_vertex_rejected(self):
        """Test that only leaves can be split."""
        with self.assertRaises(InvalidParameterError):
            surgery_split_leaf(Forest((self.caterpillar,)), EdgeRef(0, "m"))

    def test_remove_non_maximal_rejected(self):
        """Test that only maximal vertices can be removed."""
        with self.assertRaises(InvalidParameterError):
            surgery_remove_maximal_vertex(Forest((self.caterpillar,)), EdgeRef(0))


class TestOrderAndLabels(unittest.TestCase):
    """Test cases for the partial order, granddaughters and labelings."""

    def setUp(self):
        """Set up test fixtures."""
        self.tree = vertex(vertex(LEAF, LEAF), vertex(LEAF, LEAF))
        self.forest = Forest((self.tree,))

    def test_partial_order_is_reflexive(self):
        """Test reflexivity and ancestry."""
        for v in vertices(self.forest):
            self.assertTrue(partial_order_leq(v, v, self.tree))
        self.assertTrue(partial_order_leq(EdgeRef(0), EdgeRef(0, "u"), self.tree))
        self.assertFalse(partial_order_leq(EdgeRef(0, "m"), EdgeRef(0, "u"), self.tree))

    def test_vertex_order_extends_partial_order(self):
        """Test that no vertex is listed before one of its ancestors."""
        self.assertEqual(vertex_order(self.forest), [EdgeRef(0), EdgeRef(0, "m"), EdgeRef(0, "u")])
        for forest in enumerate_forests(3, 2):
            order = vertex_order(forest)
            self.assertEqual(sorted(order, key=str), sorted(vertices(forest), key=str))
            for i, v in enumerate(order):
                for w in order[i + 1:]:
                    if v.tree_index == w.tree_index:
                        self.assertFalse(partial_order_leq(w, v, forest), (forest, v, w))

    def test_maximal_vertices(self):
        """Test the maximal vertices of a balanced tree."""
        self.assertEqual(maximal_vertices(self.tree), {EdgeRef(0, "m"), EdgeRef(0, "u")})

    def test_granddaughter(self):
        """Test that the granddaughter follows marked edges."""
        self.assertEqual(granddaughter(EdgeRef(0), self.forest), EdgeRef(0, "mm"))
        self.assertEqual(granddaughter(EdgeRef(0, "u"), self.forest), EdgeRef(0, "um"))

    def test_canonical_labeling_is_bijection(self):
        """Test that labels cover 1..n+k with roots labelled by their granddaughters."""
        for forest in enumerate_forests(3, 2):
            labeling = canonical_labeling(forest)
            self.assertEqual(sorted(labeling.leaf_labels.values()), list(range(1, 6)))
            for j in range(forest.k):
                self.assertEqual(labeling.label_of(granddaughter(EdgeRef(j), forest)), j + 1)

    def test_parse_round_trip(self):
        """Test that canonical strings parse back to the same forest."""
        for forest in enumerate_forests(3, 3):
            self.assertEqual(parse_canonical(canonical_string(forest)), forest)

    def test_parse_rejects_garbage(self):
        """Test that malformed strings are rejected."""
        with self.assertRaises(InvalidParameterError):
            parse_canonical("(.|.")


if __name__ == "__main__":
    unittest.main()

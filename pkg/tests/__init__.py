"""Unit tests for the tree-expansion laboratory."""

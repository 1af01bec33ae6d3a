"""Deterministic reductions and a bounded worker pool."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def pairwise_sum(items: Sequence[T]) -> T:
    """
    Sum items by recursive halving.

    The association order depends only on the length of the sequence, so
    repeated runs give bit-identical results regardless of scheduling.

    Args:
        items: Non-empty sequence of objects supporting ``+``

    Returns:
        The sum
    """
    if not items:
        raise ValueError("pairwise_sum needs at least one item")
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return pairwise_sum(items[:mid]) + pairwise_sum(items[mid:])


def bounded_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> List[R]:
    """Apply fn to every item on at most ``jobs`` threads, keeping input order."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))

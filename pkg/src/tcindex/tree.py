"""Ordered map from time gaps to the cases in which they were observed."""

from __future__ import annotations

from typing import Iterator

from sortedcontainers import SortedDict


class DeltaTree(SortedDict):
    """Sorted ``{delta: set(case_id)}`` with range scans over delta.

    Keyed lookups are hash lookups; inserting a new delta and range scans
    are logarithmic in the number of nodes.  Case sets are never empty.
    """

    def add(self, delta: int, case_id: int) -> None:
        cases = self.get(delta)
        if cases is None:
            self[delta] = {case_id}
        else:
            cases.add(case_id)

    def tail(self, delta: int) -> Iterator[tuple[int, set]]:
        """Nodes with key >= delta, ascending."""
        for key in self.irange(minimum=delta):
            yield key, self[key]

    def head(self, delta: int) -> Iterator[tuple[int, set]]:
        """Nodes with key <= delta, ascending."""
        for key in self.irange(maximum=delta):
            yield key, self[key]

    def at(self, delta: int) -> set:
        return self.get(delta, _EMPTY)

    def memberships(self) -> int:
        return sum(len(v) for v in self.values())


_EMPTY: frozenset = frozenset()


def tree_tail(tree: DeltaTree | None, delta: int) -> list[tuple[int, set]]:
    return [] if tree is None else list(tree.tail(delta))


def tree_head(tree: DeltaTree | None, delta: int) -> list[tuple[int, set]]:
    return [] if tree is None else list(tree.head(delta))


def tree_at(tree: DeltaTree | None, delta: int) -> frozenset | set:
    return _EMPTY if tree is None else tree.at(delta)

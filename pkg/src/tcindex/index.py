"""The temporal-relation index: construction, incremental update and stats.

For every pair of events ``(e_i, e_j)`` of one case with ``i < j`` the index
records the bucketed time gap ``t_j - t_i`` under the activity pair of the
two events.  Each case also gets an artificial start activity (ID 0) at the
bucket of its first event, so gaps measured from case start are stored
under ``(0, b)``.
"""

from __future__ import annotations

import gc
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import timedelta
from typing import Callable, Iterable, Optional

from .log import EPOCH, UNIT_SECONDS, Event, EventLog
from .tree import DeltaTree

START = 0

# (source activity label or None for the start activity, target label) -> keep?
PairFilter = Callable[[Optional[str], str], bool]


class IndexFrozenError(RuntimeError):
    """Write attempted on an index that is frozen for reading."""


class OrderViolation(ValueError):
    """An event would go before the last event already ingested for its case."""

    def __init__(self, case_label: str, bucket: int, last: int):
        self.case_label = case_label
        super().__init__(
            f"case {case_label!r}: event at bucket {bucket} precedes "
            f"last ingested bucket {last}"
        )


class IndexInvariantError(AssertionError):
    pass


@dataclass(frozen=True)
class IndexStats:
    traces: int = 0
    events: int = 0
    distinct_activities: int = 0
    unique_trees: int = 0
    total_nodes: int = 0

    def line(self) -> str:
        return (
            f"traces={self.traces} events={self.events} "
            f"activities={self.distinct_activities} "
            f"trees={self.unique_trees} nodes={self.total_nodes}"
        )


class TemporalIndex:
    """Label maps, observation sets, per-case lists and the delta trees.

    ``case_activities`` and ``case_times`` are only needed to continue
    traces with later events; after ``freeze(discard_lists=True)`` they are
    ``None`` and the index can no longer be updated.
    """

    def __init__(self, granularity: str = "minute", pair_filter: PairFilter | None = None):
        if granularity not in UNIT_SECONDS:
            raise ValueError(f"unknown granularity {granularity!r}")
        self.granularity = granularity
        self.case_counter = 0
        self.activity_counter = START + 1
        self.case_ids: dict[str, int] = {}
        self.activity_ids: dict[str, int] = {}
        self.observed_in: dict[int, set[int]] = {}
        self.case_activities: Optional[dict[int, list[int]]] = {}
        self.case_times: Optional[dict[int, list[int]]] = {}
        self.deltas: dict[tuple[int, int], DeltaTree] = {}
        self.reverse_case_labels: list[str] = []
        self.activity_labels: dict[int, str] = {}
        self.event_count = 0
        self.pair_filter = pair_filter
        self._frozen = False

    # -- state -------------------------------------------------------------

    @property
    def frozen(self) -> bool:
        return self._frozen

    @property
    def has_lists(self) -> bool:
        return self.case_activities is not None

    def freeze(self, discard_lists: bool = False) -> "TemporalIndex":
        """Make the index read-only; optionally drop the per-case lists for good."""
        self._frozen = True
        if discard_lists:
            self.case_activities = None
            self.case_times = None
        return self

    def thaw(self) -> "TemporalIndex":
        if not self.has_lists:
            raise IndexFrozenError(
                "index was frozen without its per-case lists and cannot be updated"
            )
        self._frozen = False
        return self

    # -- updates -----------------------------------------------------------

    def ingest(self, event: Event) -> None:
        self.ingest_many((event,))

    def ingest_many(self, events: Iterable[Event]) -> None:
        if self._frozen:
            raise IndexFrozenError("index is frozen; thaw() it before ingesting")
        with _gc_paused():
            if self.pair_filter is None:
                self._ingest_all_pairs(events)
            else:
                self._ingest_filtered(events)

    def _ingest_all_pairs(self, events):
        unit = timedelta(seconds=UNIT_SECONDS[self.granularity])
        case_ids = self.case_ids
        activity_ids = self.activity_ids
        observed = self.observed_in
        acts = self.case_activities
        times = self.case_times
        deltas = self.deltas
        n = 0
        try:
            for e in events:
                t = (e.timestamp - EPOCH) // unit
                c = case_ids.get(e.case_label)
                if c is None:
                    c = self._new_case(e.case_label, t)
                elif t < times[c][-1]:
                    raise OrderViolation(e.case_label, t, times[c][-1])
                a = activity_ids.get(e.activity_label)
                if a is None:
                    a = self._new_activity(e.activity_label)
                A = acts[c]
                T = times[c]
                for ak, tk in zip(A, T):
                    tree = deltas.get((ak, a))
                    if tree is None:
                        tree = deltas[(ak, a)] = DeltaTree()
                    dt = t - tk
                    cases = tree.get(dt)
                    if cases is None:
                        tree[dt] = {c}
                    else:
                        cases.add(c)
                observed[a].add(c)
                A.append(a)
                T.append(t)
                n += 1
        finally:
            self.event_count += n

    def _ingest_filtered(self, events):
        unit = timedelta(seconds=UNIT_SECONDS[self.granularity])
        keep_cache: dict[tuple[int, int], bool] = {}
        labels = self.activity_labels
        n = 0
        try:
            for e in events:
                t = (e.timestamp - EPOCH) // unit
                c = self.case_ids.get(e.case_label)
                if c is None:
                    c = self._new_case(e.case_label, t)
                elif t < self.case_times[c][-1]:
                    raise OrderViolation(e.case_label, t, self.case_times[c][-1])
                a = self.activity_ids.get(e.activity_label)
                if a is None:
                    a = self._new_activity(e.activity_label)
                A = self.case_activities[c]
                T = self.case_times[c]
                for ak, tk in zip(A, T):
                    key = (ak, a)
                    keep = keep_cache.get(key)
                    if keep is None:
                        keep = keep_cache[key] = bool(
                            self.pair_filter(labels.get(ak), labels[a])
                        )
                    if keep:
                        tree = self.deltas.get(key)
                        if tree is None:
                            tree = self.deltas[key] = DeltaTree()
                        tree.add(t - tk, c)
                self.observed_in[a].add(c)
                A.append(a)
                T.append(t)
                n += 1
        finally:
            self.event_count += n

    def _new_case(self, label: str, bucket: int) -> int:
        if not self.has_lists:
            raise IndexFrozenError("index has no per-case lists")
        c = self.case_counter
        self.case_counter += 1
        self.case_ids[label] = c
        self.reverse_case_labels.append(label)
        self.case_activities[c] = [START]
        self.case_times[c] = [bucket]
        return c

    def _new_activity(self, label: str) -> int:
        a = self.activity_counter
        self.activity_counter += 1
        self.activity_ids[label] = a
        self.activity_labels[a] = label
        self.observed_in[a] = set()
        return a

    # -- reading -----------------------------------------------------------

    def tree(self, source: int, target: int) -> Optional[DeltaTree]:
        return self.deltas.get((source, target))

    def labels(self, case_ids: Iterable[int]) -> set[str]:
        return set(map(self.reverse_case_labels.__getitem__, case_ids))

    def all_case_ids(self) -> range:
        return range(self.case_counter)

    def stats(self) -> IndexStats:
        return index_stats(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TemporalIndex):
            return NotImplemented
        return (
            self.granularity == other.granularity
            and self.case_counter == other.case_counter
            and self.activity_counter == other.activity_counter
            and self.event_count == other.event_count
            and self.case_ids == other.case_ids
            and self.activity_ids == other.activity_ids
            and self.observed_in == other.observed_in
            and self.case_activities == other.case_activities
            and self.case_times == other.case_times
            and self.reverse_case_labels == other.reverse_case_labels
            and self.deltas == other.deltas
        )

    __hash__ = None

    def __repr__(self) -> str:
        state = "frozen" if self._frozen else "writable"
        return f"<TemporalIndex {self.granularity} {state} {self.stats().line()}>"


@contextmanager
def _gc_paused():
    # millions of small sets make the cyclic collector dominate build time
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def build_index(
    log: EventLog,
    granularity: str = "minute",
    *,
    pair_filter: PairFilter | None = None,
    discard_lists: bool = False,
) -> TemporalIndex:
    index = TemporalIndex(granularity, pair_filter)
    index.ingest_many(log.events)
    if discard_lists:
        index.freeze(discard_lists=True)
    return index


def ingest_event(index: TemporalIndex, event: Event) -> None:
    index.ingest(event)


def index_stats(index: TemporalIndex) -> IndexStats:
    return IndexStats(
        traces=len(index.case_ids),
        events=index.event_count,
        distinct_activities=len(index.activity_ids),
        unique_trees=len(index.deltas),
        total_nodes=sum(len(t) for t in index.deltas.values()),
    )


def check_invariants(index: TemporalIndex) -> None:
    """Raise IndexInvariantError on the first broken structural invariant.

    With per-case lists present this enumerates every same-case position
    pair, so it is quadratic in trace length.
    """

    def fail(msg):
        raise IndexInvariantError(msg)

    if START in index.activity_ids.values():
        fail("activity ID 0 assigned to a label")
    if len(set(index.case_ids.values())) != len(index.case_ids):
        fail("case IDs not injective")
    if len(set(index.activity_ids.values())) != len(index.activity_ids):
        fail("activity IDs not injective")
    if {label: c for c, label in enumerate(index.reverse_case_labels)} != index.case_ids:
        fail("reverse case labels are not the inverse of the case map")
    if set(index.observed_in) != set(index.activity_ids.values()):
        fail("observation map keys differ from activity IDs")
    for key, tree in index.deltas.items():
        keys = list(tree.keys())
        if keys and keys[0] < 0:
            fail(f"negative delta in tree {key}")
        if any(not cases for cases in tree.values()):
            fail(f"empty case set in tree {key}")

    if not index.has_lists:
        return

    acts, times = index.case_activities, index.case_times
    if set(acts) != set(index.case_ids.values()) or set(times) != set(acts):
        fail("per-case lists do not cover exactly the known cases")
    expected: dict[tuple[int, int], dict[int, set[int]]] = {}
    observed: dict[int, set[int]] = {a: set() for a in index.activity_ids.values()}
    labels = index.activity_labels
    keep_cache: dict[tuple[int, int], bool] = {}
    for c, A in acts.items():
        T = times[c]
        if len(A) != len(T):
            fail(f"case {c}: activity and time lists differ in length")
        if A[0] != START:
            fail(f"case {c}: list does not start with the start activity")
        if any(T[i] > T[i + 1] for i in range(len(T) - 1)):
            fail(f"case {c}: times decrease")
        for j in range(1, len(A)):
            observed[A[j]].add(c)
            for k in range(j):
                key = (A[k], A[j])
                if index.pair_filter is not None:
                    keep = keep_cache.get(key)
                    if keep is None:
                        keep = keep_cache[key] = bool(
                            index.pair_filter(labels.get(A[k]), labels[A[j]])
                        )
                    if not keep:
                        continue
                expected.setdefault(key, {}).setdefault(T[j] - T[k], set()).add(c)
    if observed != index.observed_in:
        fail("observation map disagrees with per-case lists")
    if len(expected) != len(index.deltas):
        fail(f"{len(index.deltas)} trees but {len(expected)} observed activity pairs")
    for key, nodes in expected.items():
        tree = index.deltas.get(key)
        if tree is None:
            fail(f"missing tree for pair {key}")
        if dict(tree) != nodes:
            fail(f"tree {key} does not match the pairs in the per-case lists")
    if sum(len(A) - 1 for A in acts.values()) != index.event_count:
        fail("event count disagrees with per-case lists")

"""Save and load a TemporalIndex as a single sectioned CSV file.

Layout (version 1)::

    #header                 key,value rows: version, granularity,
                            case_counter, activity_counter, events, frozen
    #cases                  label,case_id
    #activities             label,activity_id
    #observed               activity_id,case_id
    #lists                  case_id,position,activity_id,bucket
    #deltas                 source_id,target_id,delta,case_id
    #end

A section marker is a one-field row starting with ``#``; data rows always
have at least two fields, so labels beginning with ``#`` stay unambiguous.
Empty sections are omitted and ``#lists`` is absent from frozen archives.
Rows are sorted within each section, which makes the output byte-for-byte
deterministic.
"""

from __future__ import annotations

import csv
import io
import os
from typing import Iterator

from .index import START, TemporalIndex
from .log import UNIT_SECONDS
from .tree import DeltaTree

FORMAT_VERSION = "1"
SECTIONS = ("header", "cases", "activities", "observed", "lists", "deltas")
_WIDTH = {"header": 2, "cases": 2, "activities": 2, "observed": 2, "lists": 4, "deltas": 4}


class ArchiveError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"archive line {line}: {message}")


def _rows(index: TemporalIndex) -> Iterator[tuple]:
    frozen = not index.has_lists
    yield ("#header",)
    yield ("version", FORMAT_VERSION)
    yield ("granularity", index.granularity)
    yield ("case_counter", index.case_counter)
    yield ("activity_counter", index.activity_counter)
    yield ("events", index.event_count)
    yield ("frozen", int(frozen))
    if index.case_ids:
        yield ("#cases",)
        yield from sorted(index.case_ids.items())
    if index.activity_ids:
        yield ("#activities",)
        yield from sorted(index.activity_ids.items())
    if any(index.observed_in.values()):
        yield ("#observed",)
        for a in sorted(index.observed_in):
            for c in sorted(index.observed_in[a]):
                yield (a, c)
    if not frozen and index.case_activities:
        yield ("#lists",)
        for c in sorted(index.case_activities):
            for pos, (a, t) in enumerate(zip(index.case_activities[c], index.case_times[c])):
                yield (c, pos, a, t)
    if index.deltas:
        yield ("#deltas",)
        for src, tgt in sorted(index.deltas):
            for dt, cases in index.deltas[(src, tgt)].items():
                for c in sorted(cases):
                    yield (src, tgt, dt, c)
    yield ("#end",)


def save_index(index: TemporalIndex, sink) -> None:
    """Write *index* to a binary stream or a file path."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            return save_index(index, fh)
    stream = io.TextIOWrapper(sink, encoding="utf-8", newline="", write_through=False)
    try:
        csv.writer(stream, lineterminator="\n").writerows(_rows(index))
        stream.flush()
    finally:
        stream.detach()


def _int(value: str, line: int, what: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ArchiveError(f"{what} {value!r} is not an integer", line) from None


def load_index(source) -> TemporalIndex:
    """Read an archive written by :func:`save_index` from a binary stream or path."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return load_index(fh)
    stream = io.TextIOWrapper(source, encoding="utf-8", newline="")
    try:
        return _load(csv.reader(stream))
    finally:
        stream.detach()


class _Loader:
    """Consumes archive rows in order, building the index as it goes."""

    def __init__(self):
        self.header: dict[str, tuple[int, str]] = {}
        self.index: TemporalIndex | None = None
        self.frozen = False
        self.labels: list[str | None] = []
        self.acts: dict[int, list[int]] = {}
        self.times: dict[int, list[int]] = {}
        self.key = None
        self.nodes: dict[int, set[int]] = {}
        self.seen_deltas = False

    # -- header ------------------------------------------------------------

    def header_row(self, line, row):
        key, value = row
        if key in self.header:
            raise ArchiveError(f"duplicate header key {key!r}", line)
        self.header[key] = (line, value)

    def start_body(self):
        h = self.header
        for key in ("version", "granularity", "case_counter", "activity_counter",
                    "events", "frozen"):
            if key not in h:
                raise ArchiveError(f"header lacks {key!r}")
        line, version = h["version"]
        if version != FORMAT_VERSION:
            raise ArchiveError(
                f"unsupported archive version {version!r}, expected {FORMAT_VERSION}", line
            )
        line, granularity = h["granularity"]
        if granularity not in UNIT_SECONDS:
            raise ArchiveError(f"unknown granularity {granularity!r}", line)
        index = TemporalIndex(granularity)
        index.case_counter = _int(h["case_counter"][1], h["case_counter"][0], "case_counter")
        index.activity_counter = _int(
            h["activity_counter"][1], h["activity_counter"][0], "activity_counter"
        )
        index.event_count = _int(h["events"][1], h["events"][0], "events")
        self.frozen = h["frozen"][1] == "1"
        self.labels = [None] * index.case_counter
        self.index = index

    # -- references --------------------------------------------------------

    def case_ref(self, value, line):
        c = _int(value, line, "case id")
        if not 0 <= c < self.index.case_counter:
            raise ArchiveError(f"unknown case id {c}", line)
        return c

    def activity_ref(self, value, line, allow_start=False):
        a = _int(value, line, "activity id")
        if a not in self.index.activity_labels and not (allow_start and a == START):
            raise ArchiveError(f"unknown activity id {a}", line)
        return a

    # -- sections ----------------------------------------------------------

    def cases_row(self, line, row):
        label, cid = row
        index = self.index
        c = _int(cid, line, "case id")
        if not 0 <= c < index.case_counter or self.labels[c] is not None:
            raise ArchiveError(f"case id {c} out of range or duplicated", line)
        if label in index.case_ids:
            raise ArchiveError(f"duplicate case label {label!r}", line)
        self.labels[c] = label
        index.case_ids[label] = c

    def activities_row(self, line, row):
        label, aid = row
        index = self.index
        a = _int(aid, line, "activity id")
        if not START < a < index.activity_counter or a in index.activity_labels:
            raise ArchiveError(f"activity id {a} out of range or duplicated", line)
        if label in index.activity_ids:
            raise ArchiveError(f"duplicate activity label {label!r}", line)
        index.activity_ids[label] = a
        index.activity_labels[a] = label
        index.observed_in[a] = set()

    def observed_row(self, line, row):
        self.index.observed_in[self.activity_ref(row[0], line)].add(self.case_ref(row[1], line))

    def lists_row(self, line, row):
        if self.frozen:
            raise ArchiveError("frozen archive carries per-case lists", line)
        cid, pos, aid, bucket = row
        c = self.case_ref(cid, line)
        A = self.acts.setdefault(c, [])
        if _int(pos, line, "position") != len(A):
            raise ArchiveError(f"case {c}: list position {pos} out of sequence", line)
        A.append(self.activity_ref(aid, line, allow_start=not A))
        self.times.setdefault(c, []).append(_int(bucket, line, "bucket"))

    def deltas_row(self, line, row):
        src, tgt, dt, cid = row
        k = (self.activity_ref(src, line, allow_start=True), self.activity_ref(tgt, line))
        if k != self.key:
            if self.key is not None:
                if k < self.key:
                    raise ArchiveError(f"delta rows for pair {k} not contiguous", line)
                self.index.deltas[self.key] = DeltaTree(self.nodes)
            self.key, self.nodes = k, {}
        d = _int(dt, line, "delta")
        if d < 0:
            raise ArchiveError(f"negative delta {d}", line)
        self.nodes.setdefault(d, set()).add(self.case_ref(cid, line))
        self.seen_deltas = True

    def finish(self) -> TemporalIndex:
        index = self.index
        if None in self.labels:
            raise ArchiveError(f"case id {self.labels.index(None)} has no label")
        index.reverse_case_labels = self.labels
        if self.key is not None:
            index.deltas[self.key] = DeltaTree(self.nodes)
        if index.case_counter and not self.seen_deltas:
            raise ArchiveError("missing #deltas section")
        if self.frozen:
            index.freeze(discard_lists=True)
        else:
            if len(self.acts) != index.case_counter:
                raise ArchiveError(
                    f"per-case lists cover {len(self.acts)} of {index.case_counter} cases"
                )
            index.case_activities = self.acts
            index.case_times = self.times
        return index


def _load(reader) -> TemporalIndex:
    loader = _Loader()
    handler = None
    current = None
    ended = False
    for row in reader:
        line = reader.line_num
        if ended:
            raise ArchiveError("data after #end", line)
        if len(row) == 1 and row[0].startswith("#"):
            name = row[0][1:]
            if current is None and name != "header":
                raise ArchiveError("archive must start with #header", line)
            if name == "end":
                ended = True
            elif name not in SECTIONS:
                raise ArchiveError(f"unknown section {row[0]!r}", line)
            elif current is not None and SECTIONS.index(name) <= SECTIONS.index(current):
                raise ArchiveError(f"section {row[0]!r} duplicated or out of order", line)
            if current == "header":
                loader.start_body()
            if not ended:
                current = name
                handler = getattr(loader, f"{name}_row")
            continue
        if current is None:
            raise ArchiveError("row before the first section marker", line)
        if len(row) != _WIDTH[current]:
            raise ArchiveError(
                f"{current} row has {len(row)} fields, expected {_WIDTH[current]}", line
            )
        handler(line, row)
    if current is None:
        raise ArchiveError("missing #header section")
    if not ended:
        raise ArchiveError("archive is truncated: no #end marker")
    return loader.finish()

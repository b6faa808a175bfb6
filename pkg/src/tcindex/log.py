"""Event-log data model and ingestion from CSV and XES sources."""

from __future__ import annotations

import csv
import io
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from operator import attrgetter
from typing import IO, Iterable, Iterator, Optional

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

UNIT_SECONDS = {"minute": 60, "hour": 3600, "day": 86400}
GRANULARITIES = tuple(UNIT_SECONDS)
LIFECYCLE_MODES = ("ignore", "suffix", "filter")
FORMATS = ("csv", "xes")

CANONICAL_COLUMNS = ("case", "activity", "timestamp", "lifecycle")


class ConfigError(ValueError):
    """Invalid ingestion configuration, or a source that does not match it."""


class LogParseError(ValueError):
    """A row, event or document that cannot be turned into an Event."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, slots=True)
class Event:
    case_label: str
    activity_label: str
    timestamp: datetime
    lifecycle: Optional[str] = None

    def __post_init__(self):
        case = self.case_label.strip()
        activity = self.activity_label.strip()
        if not case:
            raise ValueError("case label is empty")
        if not activity:
            raise ValueError("activity label is empty")
        ts = self.timestamp
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        elif ts.utcoffset() != timedelta(0) or ts.tzinfo is not timezone.utc:
            ts = ts.astimezone(timezone.utc)
        if case is not self.case_label:
            object.__setattr__(self, "case_label", case)
        if activity is not self.activity_label:
            object.__setattr__(self, "activity_label", activity)
        if ts is not self.timestamp:
            object.__setattr__(self, "timestamp", ts)


@dataclass(frozen=True)
class EventLog:
    """Events in non-decreasing timestamp order.

    Use :meth:`from_events` to build one from unordered input; equal
    timestamps keep their input order.
    """

    events: tuple[Event, ...] = ()

    def __post_init__(self):
        events = self.events
        for i in range(1, len(events)):
            if events[i].timestamp < events[i - 1].timestamp:
                raise ValueError(
                    f"events out of timestamp order at position {i}; "
                    "use EventLog.from_events to sort"
                )

    @classmethod
    def from_events(cls, events: Iterable[Event]) -> "EventLog":
        return cls(tuple(sorted(events, key=attrgetter("timestamp"))))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    def case_labels(self) -> list[str]:
        """Case labels in order of first appearance."""
        return list(dict.fromkeys(e.case_label for e in self.events))

    def activity_labels(self) -> list[str]:
        return list(dict.fromkeys(e.activity_label for e in self.events))

    def traces(self) -> dict[str, list[Event]]:
        out: dict[str, list[Event]] = {}
        for e in self.events:
            out.setdefault(e.case_label, []).append(e)
        return out


@dataclass(frozen=True)
class IngestionConfig:
    format: str = "csv"
    case_column: str = "case"
    activity_column: str = "activity"
    time_column: str = "timestamp"
    time_format: Optional[str] = None  # None means ISO-8601
    granularity: str = "minute"
    lifecycle_mode: str = "ignore"
    lifecycle_column: Optional[str] = None

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}; expected one of {FORMATS}")
        if self.granularity not in UNIT_SECONDS:
            raise ConfigError(
                f"unknown granularity {self.granularity!r}; expected one of {GRANULARITIES}"
            )
        if self.lifecycle_mode not in LIFECYCLE_MODES:
            raise ConfigError(
                f"unknown lifecycle mode {self.lifecycle_mode!r}; expected one of {LIFECYCLE_MODES}"
            )
        cols = [self.case_column, self.activity_column, self.time_column]
        if self.lifecycle_column is not None:
            cols.append(self.lifecycle_column)
        if len(set(cols)) != len(cols):
            raise ConfigError(f"CSV column names must be distinct, got {cols}")


_FRACTION = re.compile(r"(\.\d+)")


def parse_timestamp(text: str, fmt: Optional[str] = None) -> datetime:
    """Parse *text* into a UTC-aware datetime.

    Naive values are taken to be UTC already.
    """
    text = text.strip()
    if fmt is not None:
        ts = datetime.strptime(text, fmt)
    else:
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        # fromisoformat on 3.10 only accepts 3 or 6 fractional digits
        m = _FRACTION.search(text)
        if m and len(m.group(1)) not in (4, 7):
            frac = (m.group(1)[1:] + "000000")[:6]
            text = text[: m.start()] + "." + frac + text[m.end():]
        ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def to_bucket(timestamp: datetime, granularity: str) -> int:
    """Whole granularity units elapsed since the Unix epoch (floored)."""
    if timestamp.tzinfo is None:
        timestamp = timestamp.replace(tzinfo=timezone.utc)
    return (timestamp - EPOCH) // timedelta(seconds=UNIT_SECONDS[granularity])


def _text_stream(source) -> IO[str]:
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline="")


def parse_csv(source, cfg: IngestionConfig = IngestionConfig()) -> EventLog:
    """Read a CSV event log from a binary stream.

    Stops at the first row whose timestamp does not parse.
    """
    stream = _text_stream(source)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigError("CSV source is empty; a header row is required") from None
    header = [h.strip() for h in header]
    wanted = [cfg.case_column, cfg.activity_column, cfg.time_column]
    if cfg.lifecycle_column is not None:
        wanted.append(cfg.lifecycle_column)
    for col in wanted:
        if col not in header:
            raise ConfigError(f"missing column {col!r} in CSV header {header}")
    ci = header.index(cfg.case_column)
    ai = header.index(cfg.activity_column)
    ti = header.index(cfg.time_column)
    li = header.index(cfg.lifecycle_column) if cfg.lifecycle_column is not None else None
    width = max(ci, ai, ti, -1 if li is None else li)

    events = []
    for row in reader:
        if not row:
            continue
        line = reader.line_num
        if len(row) <= width:
            raise LogParseError(f"expected at least {width + 1} fields, got {len(row)}", line)
        try:
            ts = parse_timestamp(row[ti], cfg.time_format)
        except ValueError as exc:
            raise LogParseError(f"unparseable timestamp {row[ti]!r}: {exc}", line) from None
        stage = row[li].strip() if li is not None else ""
        try:
            events.append(Event(row[ci], row[ai], ts, stage or None))
        except ValueError as exc:
            raise LogParseError(str(exc), line) from None
    return EventLog.from_events(events)


def write_csv(log: EventLog, sink) -> None:
    """Write *log* in the canonical CSV layout read back by ``parse_csv``."""
    text = isinstance(sink, io.TextIOBase)
    stream = sink if text else io.TextIOWrapper(sink, encoding="utf-8", newline="")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CANONICAL_COLUMNS)
    for e in log.events:
        writer.writerow(
            (e.case_label, e.activity_label, e.timestamp.isoformat(), e.lifecycle or "")
        )
    stream.flush()
    if not text:
        stream.detach()


CANONICAL_CONFIG = IngestionConfig(lifecycle_column="lifecycle")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _attributes(elem) -> dict[str, str]:
    return {
        child.get("key"): child.get("value")
        for child in elem
        if child.get("key") is not None
    }


def parse_xes(source, cfg: IngestionConfig = IngestionConfig(format="xes")) -> EventLog:
    """Read the case, activity, timestamp and lifecycle attributes from XES XML.

    Other extension attributes are ignored.
    """
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    try:
        root = ET.parse(source).getroot()
    except ET.ParseError as exc:
        line, col = exc.position
        raise LogParseError(f"malformed XES at column {col}: {exc}", line) from None

    events = []
    traces = [t for t in root if _local(t.tag) == "trace"]
    for ti, trace in enumerate(traces):
        case = _attributes(trace).get("concept:name")
        if not case or not case.strip():
            raise LogParseError(f"trace {ti} has no concept:name")
        for ei, ev in enumerate(e for e in trace if _local(e.tag) == "event"):
            attrs = _attributes(ev)
            where = f"trace {ti} ({case!r}) event {ei}"
            if "time:timestamp" not in attrs:
                raise LogParseError(f"{where} has no time:timestamp")
            if not attrs.get("concept:name"):
                raise LogParseError(f"{where} has no concept:name")
            try:
                ts = parse_timestamp(attrs["time:timestamp"], cfg.time_format)
            except ValueError as exc:
                raise LogParseError(f"{where}: unparseable timestamp: {exc}") from None
            events.append(
                Event(case, attrs["concept:name"], ts, attrs.get("lifecycle:transition"))
            )
    return EventLog.from_events(events)


def apply_lifecycle(log: EventLog, cfg: IngestionConfig) -> EventLog:
    """Fold lifecycle stages into activities (``suffix``) or drop non-completions (``filter``).

    An event without a stage counts as ``complete``.
    """
    mode = cfg.lifecycle_mode
    if mode == "ignore":
        return log
    if mode == "suffix":
        return EventLog(tuple(
            replace(e, activity_label=f"{e.activity_label}_{e.lifecycle or 'complete'}")
            for e in log.events
        ))
    return EventLog(tuple(
        e for e in log.events
        if e.lifecycle is None or e.lifecycle.strip().lower() == "complete"
    ))


def read_log(path, cfg: IngestionConfig) -> EventLog:
    """Parse the file at *path* per ``cfg.format`` and apply the lifecycle mode."""
    parse = parse_csv if cfg.format == "csv" else parse_xes
    with open(path, "rb") as fh:
        log = parse(fh, cfg)
    return apply_lifecycle(log, cfg)

"""Seeded synthetic event logs, log splitting and random rule generation."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
from datetime import datetime, timezone

import numpy as np

from .log import EPOCH, Event, EventLog, to_bucket
from .rules import CODES, PAIR_CODES, And, AtomicQuery, Not, Or, RuleExpr

DEFAULT_START = datetime(2020, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class LogProfile:
    """Shape of a synthetic log.

    Trace lengths are drawn from [min_length, max_length] with mean
    avg_length.  Cases start uniformly over ``time_horizon`` seconds; gaps
    between consecutive events of a case are in seconds.
    """

    traces: int = 100
    alphabet_size: int = 5
    min_length: int = 1
    avg_length: float = 5
    max_length: int = 10
    time_horizon: float = 30 * 86400
    gap_distribution: str = "exponential"
    gap_low: float = 0
    gap_high: float = 7200
    gap_mean: float = 3600
    seed: int = 0

    def __post_init__(self):
        if min(self.traces, self.alphabet_size, self.min_length) < 1:
            raise ValueError("traces, alphabet_size and min_length must be positive")
        if not self.min_length <= self.avg_length <= self.max_length:
            raise ValueError("need min_length <= avg_length <= max_length")
        if self.time_horizon <= 0:
            raise ValueError("time_horizon must be positive")
        if self.gap_distribution not in ("uniform", "exponential"):
            raise ValueError(f"unknown gap distribution {self.gap_distribution!r}")
        if self.gap_distribution == "uniform" and not 0 <= self.gap_low <= self.gap_high:
            raise ValueError("need 0 <= gap_low <= gap_high")
        if self.gap_distribution == "exponential" and self.gap_mean <= 0:
            raise ValueError("gap_mean must be positive")


# Shapes of two public logs (trace count, alphabet, min/avg/max length).
BPIC13CP_LIKE = LogProfile(traces=1487, alphabet_size=4, min_length=1, avg_length=4, max_length=35)
BPIC12_LIKE = LogProfile(traces=13087, alphabet_size=24, min_length=3, avg_length=20, max_length=175)


def load_profile(path) -> LogProfile:
    """Read a ``[profile]`` section of ``key = value`` lines."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_section("profile"):
        raise ValueError(f"{path}: no [profile] section")
    types = {f.name: f.type for f in fields(LogProfile)}
    kwargs = {}
    for key, raw in parser.items("profile"):
        if key not in types:
            raise ValueError(f"{path}: unknown profile key {key!r}")
        kind = types[key]
        kwargs[key] = raw if kind == "str" else (int(raw) if kind == "int" else float(raw))
    return LogProfile(**kwargs)


def _lengths(p: LogProfile, rng) -> np.ndarray:
    lo, avg, hi = p.min_length, p.avg_length, p.max_length
    if hi == lo:
        return np.full(p.traces, lo, dtype=np.int64)
    # two uniform halves mixed so the mean lands on avg
    p_low = (hi - avg) / (hi - lo)
    low = rng.integers(lo, int(np.floor(avg)) + 1, p.traces)
    high = rng.integers(int(np.ceil(avg)), hi + 1, p.traces)
    return np.where(rng.random(p.traces) < p_low, low, high)


def generate(profile: LogProfile, start: datetime = DEFAULT_START) -> EventLog:
    rng = np.random.default_rng(profile.seed)
    lengths = _lengths(profile, rng)
    total = int(lengths.sum())
    case_of = np.repeat(np.arange(profile.traces), lengths)
    first = np.zeros(total, dtype=bool)
    first[np.cumsum(lengths) - lengths] = True

    if profile.gap_distribution == "uniform":
        gaps = rng.uniform(profile.gap_low, profile.gap_high, total)
    else:
        gaps = rng.exponential(profile.gap_mean, total)
    starts = rng.uniform(0, profile.time_horizon, profile.traces)
    gaps[first] = 0.0
    # cumulative gap within each case, offset by the case start
    running = np.cumsum(gaps)
    offsets = running - np.repeat(running[first], lengths)
    seconds = np.floor(starts[case_of] + offsets).astype(np.int64)
    activities = rng.integers(0, profile.alphabet_size, total)

    order = np.argsort(seconds, kind="stable")
    base = start.timestamp()
    case_names = [f"c{i}" for i in range(profile.traces)]
    act_names = [f"a{j}" for j in range(profile.alphabet_size)]
    utc = timezone.utc
    fromts = datetime.fromtimestamp
    events = [
        Event(case_names[c], act_names[a], fromts(base + s, utc))
        for c, a, s in zip(
            case_of[order].tolist(), activities[order].tolist(), seconds[order].tolist()
        )
    ]
    return EventLog(tuple(events))


def split_by_traces(log: EventLog, parts: int) -> list[EventLog]:
    """Partition whole traces into *parts* fragments of near-equal trace count."""
    if parts < 1:
        raise ValueError("parts must be >= 1")
    labels = log.case_labels()
    size, extra = divmod(len(labels), parts)
    part_of = {}
    pos = 0
    for p in range(parts):
        n = size + (p < extra)
        for label in labels[pos:pos + n]:
            part_of[label] = p
        pos += n
    buckets: list[list[Event]] = [[] for _ in range(parts)]
    for e in log:
        buckets[part_of[e.case_label]].append(e)
    return [EventLog(tuple(b)) for b in buckets]


def split_by_timeframe(log: EventLog, parts: int) -> list[EventLog]:
    """Slice the log into *parts* equal time windows; traces may span several."""
    if parts < 1:
        raise ValueError("parts must be >= 1")
    if not len(log):
        return [EventLog() for _ in range(parts)]
    secs = [(e.timestamp - EPOCH).total_seconds() for e in log]
    t0 = secs[0]
    window = (secs[-1] - t0) / parts
    buckets: list[list[Event]] = [[] for _ in range(parts)]
    for e, s in zip(log, secs):
        p = min(int((s - t0) // window), parts - 1) if window > 0 else 0
        buckets[p].append(e)
    return [EventLog(tuple(b)) for b in buckets]


def max_case_span(log: EventLog, granularity: str) -> int:
    """Largest first-to-last bucket distance over all cases."""
    first: dict[str, int] = {}
    span = 0
    for e in log:
        t = to_bucket(e.timestamp, granularity)
        t0 = first.setdefault(e.case_label, t)
        span = max(span, t - t0)
    return span


def random_rules(
    activities: list[str],
    max_delta: int,
    n: int,
    seed: int = 0,
    codes: tuple[str, ...] = PAIR_CODES,
) -> list[AtomicQuery]:
    """Atomic queries with codes, activities and deltas drawn uniformly."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        code = codes[rng.integers(len(codes))]
        if code in PAIR_CODES:
            a = activities[rng.integers(len(activities))]
            b = activities[rng.integers(len(activities))]
            out.append(AtomicQuery(code, a, b, int(rng.integers(0, max_delta + 1))))
        else:
            out.append(AtomicQuery(code, None, activities[rng.integers(len(activities))]))
    return out


def random_expression(
    activities: list[str], max_delta: int, rng: np.random.Generator, depth: int = 3
) -> RuleExpr:
    """A random AND/OR/NOT tree over atomic queries of every code."""
    if depth <= 0 or rng.random() < 0.3:
        seed = int(rng.integers(2**31))
        return random_rules(activities, max_delta, 1, seed, CODES)[0]
    kind = rng.integers(3)
    if kind == 0:
        return Not(random_expression(activities, max_delta, rng, depth - 1))
    operands = tuple(
        random_expression(activities, max_delta, rng, depth - 1)
        for _ in range(int(rng.integers(2, 4)))
    )
    return And(operands) if kind == 1 else Or(operands)

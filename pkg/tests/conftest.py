from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest
from hypothesis import strategies as st

from tcindex import Event, EventLog, LogProfile, generate, parse_csv, parse_xes

DATA = Path(__file__).parent / "data"
T0 = datetime(2021, 1, 1, tzinfo=timezone.utc)


def ev(case, activity, minutes, lifecycle=None):
    return Event(case, activity, T0 + timedelta(minutes=minutes), lifecycle)


def make_log(spec):
    """``{"c1": [("A", 0), ("B", 5)], ...}`` -> EventLog, times in minutes."""
    return EventLog.from_events(
        ev(case, act, m) for case, steps in spec.items() for act, m in steps
    )


L1_SPEC = {
    "c1": [("A", 0), ("B", 5)],
    "c2": [("A", 0), ("B", 20)],
    "c3": [("B", 3)],
    "c4": [("A", 2)],
}


@pytest.fixture
def l1():
    return make_log(L1_SPEC)


@st.composite
def small_logs(draw, max_cases=6, alphabet="ABCD", max_events=25, max_gap=30):
    """Random logs with per-case non-decreasing minute offsets, including ties."""
    n = draw(st.integers(0, max_events))
    clock = {}
    events = []
    for _ in range(n):
        case = f"c{draw(st.integers(0, max_cases - 1))}"
        clock[case] = clock.get(case, draw(st.integers(0, 40))) + draw(st.integers(0, max_gap))
        events.append(ev(case, draw(st.sampled_from(alphabet)), clock[case]))
    return EventLog.from_events(events)


def corpus():
    """Every log of at most 1000 events the suite ships or generates."""
    logs = {"l1": make_log(L1_SPEC)}
    with open(DATA / "l1.csv", "rb") as fh:
        logs["l1.csv"] = parse_csv(fh)
    with open(DATA / "small.xes", "rb") as fh:
        logs["small.xes"] = parse_xes(fh)
    for seed in range(10):
        p = LogProfile(traces=40, alphabet_size=3 + seed % 5, min_length=1, avg_length=8,
                       max_length=20, time_horizon=5 * 86400, gap_mean=1800, seed=seed)
        logs[f"synth{seed}"] = generate(p)
    return logs

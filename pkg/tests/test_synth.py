from collections import Counter

import pytest

from conftest import make_log
from tcindex import (
    BPIC13CP_LIKE,
    LogProfile,
    TemporalIndex,
    build_index,
    eval_expr,
    generate,
    ingest_event,
    load_profile,
    split_by_timeframe,
    split_by_traces,
)
from tcindex.synth import max_case_span, random_rules


def test_deterministic():
    p = LogProfile(traces=50, seed=7)
    assert generate(p) == generate(p)
    assert generate(p) != generate(LogProfile(traces=50, seed=8))


def test_single_event_profile():
    log = generate(LogProfile(traces=1, min_length=1, avg_length=1, max_length=1))
    assert len(log) == 1
    assert log[0].case_label == "c0" and log[0].activity_label in {f"a{j}" for j in range(5)}


@pytest.mark.parametrize("dist", ["uniform", "exponential"])
def test_shape(dist):
    p = LogProfile(traces=300, alphabet_size=6, min_length=2, avg_length=6, max_length=12,
                   gap_distribution=dist, seed=1)
    log = generate(p)
    lengths = [len(t) for t in log.traces().values()]
    assert len(lengths) == 300
    assert min(lengths) >= 2 and max(lengths) <= 12
    assert abs(sum(lengths) / 300 - 6) < 0.6
    assert set(log.activity_labels()) <= {f"a{j}" for j in range(6)}
    stamps = [e.timestamp for e in log]
    assert stamps == sorted(stamps)


def test_bpic13cp_shape():
    log = generate(BPIC13CP_LIKE)
    assert len(log.case_labels()) == 1487
    assert len(log.activity_labels()) == 4
    # public log has 6660 events
    assert abs(len(log) - 6660) <= 0.2 * 6660


@pytest.mark.parametrize("kwargs", [
    dict(traces=0),
    dict(alphabet_size=0),
    dict(min_length=5, avg_length=4),
    dict(avg_length=11, max_length=10),
    dict(gap_distribution="normal"),
    dict(time_horizon=0),
])
def test_invalid_profiles(kwargs):
    with pytest.raises(ValueError):
        LogProfile(**kwargs)


def test_load_profile(tmp_path):
    path = tmp_path / "p.ini"
    path.write_text("[profile]\ntraces = 12\navg_length = 3.5\ngap_distribution = uniform\n")
    p = load_profile(path)
    assert (p.traces, p.avg_length, p.gap_distribution) == (12, 3.5, "uniform")
    path.write_text("[profile]\ncolour = red\n")
    with pytest.raises(ValueError, match="colour"):
        load_profile(path)
    path.write_text("[other]\ntraces = 1\n")
    with pytest.raises(ValueError, match="profile"):
        load_profile(path)


def test_split_by_traces_sizes():
    log = generate(LogProfile(traces=10, seed=2))
    parts = split_by_traces(log, 5)
    assert [len(p.case_labels()) for p in parts] == [2] * 5
    uneven = split_by_traces(generate(LogProfile(traces=11, seed=2)), 3)
    assert sorted(len(p.case_labels()) for p in uneven) == [3, 4, 4]
    owners = Counter(c for p in parts for c in p.case_labels())
    assert set(owners.values()) == {1}


def test_timeframe_fragments_every_spanning_trace():
    spec = {f"c{i}": [("A", m + i % 3) for m in (0, 10, 20, 30, 40)] for i in range(6)}
    spec["c0"].append(("B", 50))
    parts = split_by_timeframe(make_log(spec), 5)
    for case in spec:
        assert sum(case in p.case_labels() for p in parts) == 5


@pytest.mark.parametrize("split", [split_by_traces, split_by_timeframe])
@pytest.mark.parametrize("parts", [1, 3, 5])
def test_union_preserves_events_and_order(split, parts):
    log = generate(LogProfile(traces=60, seed=4))
    frags = split(log, parts)
    assert len(frags) == parts
    assert Counter(e for f in frags for e in f) == Counter(log)
    replay = [e for f in frags for e in f]
    for case, events in log.traces().items():
        assert [e for e in replay if e.case_label == case] == events


def test_split_rejects_zero_parts():
    log = generate(LogProfile(traces=3))
    with pytest.raises(ValueError):
        split_by_traces(log, 0)
    with pytest.raises(ValueError):
        split_by_timeframe(log, 0)


def test_timeframe_replay_matches_monolithic():
    log = generate(LogProfile(traces=80, avg_length=6, max_length=14, time_horizon=2 * 86400,
                              seed=9))
    inc = TemporalIndex("minute")
    for frag in split_by_timeframe(log, 5):
        for e in frag:
            ingest_event(inc, e)
    mono = build_index(log, "minute")
    assert inc == mono
    for q in random_rules(log.activity_labels(), max_case_span(log, "minute"), 50, seed=1):
        assert eval_expr(inc, q) == eval_expr(mono, q)


def test_random_rules_are_reproducible():
    a = random_rules(["a0", "a1"], 100, 30, seed=3)
    assert a == random_rules(["a0", "a1"], 100, 30, seed=3)
    assert len(a) == 30
    assert all(0 <= q.delta <= 100 for q in a)

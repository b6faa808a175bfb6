import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import corpus, ev, make_log, small_logs
from tcindex import (
    EventLog,
    IndexFrozenError,
    IndexStats,
    OrderViolation,
    TemporalIndex,
    build_index,
    check_invariants,
    eval_expr,
    index_stats,
    ingest_event,
    to_bucket,
)
from tcindex.index import IndexInvariantError
from tcindex.synth import max_case_span, random_rules


def expected_deltas(log, granularity):
    """Label-level delta map by enumerating every same-case position pair.

    The start activity is ``None`` and sits at the case's first bucket.
    """
    out = {}
    for case, events in log.traces().items():
        seq = [(None, to_bucket(events[0].timestamp, granularity))]
        seq += [(e.activity_label, to_bucket(e.timestamp, granularity)) for e in events]
        for j in range(1, len(seq)):
            for k in range(j):
                key = (seq[k][0], seq[j][0])
                out.setdefault(key, {}).setdefault(seq[j][1] - seq[k][1], set()).add(case)
    return out


def labelled_deltas(index):
    acts = {0: None, **index.activity_labels}
    return {
        (acts[a], acts[b]): {dt: index.labels(cases) for dt, cases in tree.items()}
        for (a, b), tree in index.deltas.items()
    }


def test_two_event_case():
    idx = build_index(make_log({"c1": [("A", 0), ("B", 5)]}), "minute")
    a, b = idx.activity_ids["A"], idx.activity_ids["B"]
    c1 = idx.case_ids["c1"]
    assert set(idx.deltas) == {(0, a), (0, b), (a, b)}
    assert dict(idx.tree(a, b)) == {5: {c1}}
    assert dict(idx.tree(0, b)) == {5: {c1}}
    assert dict(idx.tree(0, a)) == {0: {c1}}
    assert idx.case_activities[c1] == [0, a, b]
    assert index_stats(idx) == IndexStats(traces=1, events=2, distinct_activities=2,
                                          unique_trees=3, total_nodes=3)


def test_empty_log():
    idx = build_index(EventLog(), "hour")
    assert idx.case_counter == 0 and idx.activity_counter == 1
    assert not (idx.case_ids or idx.activity_ids or idx.observed_in or idx.deltas)
    assert index_stats(idx) == IndexStats()
    check_invariants(idx)


def test_identical_cases_share_a_node():
    idx = build_index(make_log({"c1": [("A", 0)], "c2": [("A", 0)]}), "minute")
    assert index_stats(idx) == IndexStats(traces=2, events=2, distinct_activities=1,
                                          unique_trees=1, total_nodes=1)
    (tree,) = idx.deltas.values()
    assert idx.labels(tree.at(0)) == {"c1", "c2"}


def test_repeated_pairs_collapse():
    idx = build_index(make_log({"c1": [("A", 0), ("A", 3), ("A", 6)]}), "minute")
    a = idx.activity_ids["A"]
    assert dict(idx.tree(a, a)) == {3: {0}, 6: {0}}


def test_start_activity_id_is_reserved():
    idx = build_index(make_log({"c": [("A", 0)]}), "minute")
    assert 0 not in idx.activity_ids.values()
    assert idx.activity_ids["A"] == 1


# -- incremental -------------------------------------------------------------


def test_ingest_matches_build():
    log = make_log({"c1": [("A", 0), ("B", 5)]})
    idx = TemporalIndex("minute")
    for e in log:
        ingest_event(idx, e)
    assert idx == build_index(log, "minute")


def test_ingest_continues_known_case():
    idx = build_index(make_log({"c1": [("A", 0)]}), "minute")
    ingest_event(idx, ev("c1", "B", 7))
    a, b = idx.activity_ids["A"], idx.activity_ids["B"]
    assert dict(idx.tree(a, b)) == {7: {idx.case_ids["c1"]}}


def test_ingest_rejects_within_case_disorder():
    idx = build_index(make_log({"c1": [("A", 0), ("B", 5)]}), "minute")
    with pytest.raises(OrderViolation, match="c1"):
        ingest_event(idx, ev("c1", "C", 3))
    check_invariants(idx)


def test_ingest_accepts_cross_case_disorder():
    idx = build_index(make_log({"c1": [("A", 50)]}), "minute")
    ingest_event(idx, ev("c2", "A", 10))
    check_invariants(idx)


def test_freeze_thaw():
    idx = build_index(make_log({"c1": [("A", 0)]}), "minute")
    idx.freeze()
    with pytest.raises(IndexFrozenError):
        ingest_event(idx, ev("c1", "B", 1))
    idx.thaw()
    ingest_event(idx, ev("c1", "B", 1))
    idx.freeze(discard_lists=True)
    assert idx.case_activities is None
    with pytest.raises(IndexFrozenError):
        idx.thaw()
    check_invariants(idx)


def test_frozen_build_answers_queries():
    log = make_log({"c1": [("A", 0), ("B", 5)], "c2": [("B", 1)]})
    full = build_index(log, "minute")
    frozen = build_index(log, "minute", discard_lists=True)
    assert frozen.frozen and not frozen.has_lists
    for rule in ["MAX(A,B,0)", "MINP(A,B,9)", "EXACTS(A,B,0)", "ABSENT(A)"]:
        assert eval_expr(frozen, rule) == eval_expr(full, rule)


def test_pair_filter_option():
    # keep pairs from the start activity and start->complete pairs of one activity
    def keep(src, tgt):
        return src is None or (src.endswith("_start") and tgt.endswith("_complete"))

    log = make_log({"k": [("Y_start", 0), ("Y_complete", 4), ("Z_start", 6)]})
    idx = build_index(log, "minute", pair_filter=keep)
    check_invariants(idx)
    got = set(labelled_deltas(idx))
    assert got == {(None, "Y_start"), (None, "Y_complete"), (None, "Z_start"),
                   ("Y_start", "Y_complete")}
    # observation map is unaffected by the filter
    assert eval_expr(idx, "EXISTS(Z_start)").cases == {"k"}


# -- invariants --------------------------------------------------------------


@pytest.mark.parametrize("name,log", list(corpus().items()))
def test_corpus_invariants(name, log):
    for g in ("minute", "hour"):
        idx = build_index(log, g)
        check_invariants(idx)
        assert labelled_deltas(idx) == expected_deltas(log, g)


@settings(max_examples=100, deadline=None)
@given(small_logs())
def test_pair_completeness(log):
    idx = build_index(log, "minute")
    check_invariants(idx)
    assert labelled_deltas(idx) == expected_deltas(log, "minute")


def test_invariant_checker_catches_tampering():
    idx = build_index(make_log({"c1": [("A", 0), ("B", 5)]}), "minute")
    idx.tree(idx.activity_ids["A"], idx.activity_ids["B"]).add(6, 0)
    with pytest.raises(IndexInvariantError):
        check_invariants(idx)


def test_build_is_deterministic():
    log = corpus()["synth3"]
    assert build_index(log, "minute") == build_index(log, "minute")


def _fragments(log, rng):
    """Random event-order-preserving split: cut the event sequence at random points."""
    n = len(log)
    cuts = sorted(rng.sample(range(n + 1), k=min(rng.randint(0, 4), n + 1)))
    bounds = [0, *cuts, n]
    return [log.events[a:b] for a, b in zip(bounds, bounds[1:])]


@settings(max_examples=60, deadline=None)
@given(small_logs(), st.randoms(use_true_random=False))
def test_incremental_equals_monolithic(log, rnd):
    mono = build_index(log, "minute")
    inc = TemporalIndex("minute")
    for frag in _fragments(log, rnd):
        for e in frag:
            ingest_event(inc, e)
    assert inc == mono
    rules = random_rules(log.activity_labels() or ["A"], max_case_span(log, "minute") + 2,
                         20, seed=rnd.randint(0, 10**6))
    for q in rules:
        assert eval_expr(inc, q) == eval_expr(mono, q)


def test_incremental_by_case_groups():
    # fragments that each hold whole traces, replayed in any fragment order
    log = corpus()["synth1"]
    labels = log.case_labels()
    random.Random(3).shuffle(labels)
    groups = [set(labels[i::3]) for i in range(3)]
    inc = TemporalIndex("minute")
    for group in groups:
        inc.ingest_many(e for e in log if e.case_label in group)
    mono = build_index(log, "minute")
    check_invariants(inc)
    assert labelled_deltas(inc) == labelled_deltas(mono)

from hypothesis import given
from hypothesis import strategies as st

from tcindex.tree import DeltaTree, tree_at, tree_head, tree_tail


def sample():
    t = DeltaTree()
    t.add(20, 2)
    t.add(5, 1)
    return t


def test_tail():
    assert tree_tail(sample(), 10) == [(20, {2})]
    assert tree_tail(sample(), 0) == [(5, {1}), (20, {2})]
    assert tree_tail(sample(), 21) == []


def test_head_and_at():
    assert tree_head(sample(), 10) == [(5, {1})]
    assert tree_at(sample(), 5) == {1}
    assert tree_at(sample(), 6) == set()


def test_absent_tree_is_empty():
    assert tree_tail(None, 0) == []
    assert tree_head(None, 99) == []
    assert tree_at(None, 0) == set()


def test_add_groups_cases_and_is_idempotent():
    t = DeltaTree()
    for c in (3, 1, 3):
        t.add(7, c)
    assert dict(t) == {7: {1, 3}}
    assert len(t) == 1
    assert t.memberships() == 2


nodes = st.lists(st.tuples(st.integers(0, 60), st.integers(0, 9)), max_size=60)


@given(nodes, st.integers(-5, 70))
def test_scans_match_enumeration(pairs, delta):
    t = DeltaTree()
    for dt, c in pairs:
        t.add(dt, c)
    keys = sorted({dt for dt, _ in pairs})
    assert list(t.keys()) == keys
    members = {k: {c for dt, c in pairs if dt == k} for k in keys}
    assert tree_tail(t, delta) == [(k, members[k]) for k in keys if k >= delta]
    assert tree_head(t, delta) == [(k, members[k]) for k in keys if k <= delta]
    assert tree_at(t, delta) == members.get(delta, set())

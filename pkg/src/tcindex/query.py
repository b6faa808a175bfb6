"""Rule evaluation against a TemporalIndex.

Every pair code is answered by a range scan over one delta tree: ``MAX``
keeps nodes with delta >= the bound, ``MIN`` nodes with delta <= the bound
and ``EXACT`` the single node at the bound.  Both ends are inclusive.
"""

from __future__ import annotations

from .index import START, TemporalIndex
from .rules import (
    ORDER_CODES,
    PRECEDES_CODES,
    QueryResult,
    SUBSTITUTE_CODES,
    And,
    AtomicQuery,
    Not,
    Or,
    RuleExpr,
    comparison,
    parse_rule,
)
from .tree import DeltaTree


def _scan(tree: DeltaTree | None, cmp: str, delta: int) -> set[int]:
    if tree is None:
        return set()
    if cmp == "EXACT":
        return set(tree.at(delta))
    keys = tree.irange(minimum=delta) if cmp == "MAX" else tree.irange(maximum=delta)
    return set().union(*[tree[k] for k in keys])


def _order_ids(index: TemporalIndex, cmp: str, a, b, delta: int) -> set[int]:
    if a is None or b is None:
        return set()
    return _scan(index.tree(a, b), cmp, delta)


def _substitute_ids(index: TemporalIndex, cmp: str, a, b, delta: int) -> set[int]:
    if b is None:
        return set()
    ids = _scan(index.tree(START, b), cmp, delta)
    if a is not None:
        # binary difference walks the left operand, keeping cost tied to the hits
        ids = ids - index.observed_in[a]
    return ids


def _b_first(index: TemporalIndex, a: int, b: int) -> set[int]:
    """Cases holding b whose first b is no later than their first a (or that lack a).

    One ascending walk over the start trees of a and b: at each gap, the b
    node minus every case already seen with a qualifies.
    """
    tree_a = index.tree(START, a) or {}
    tree_b = index.tree(START, b) or {}
    seen_a: set[int] = set()
    seen_b: set[int] = set()
    out: set[int] = set()
    for dt in sorted(tree_a.keys() | tree_b.keys()):
        node = tree_b.get(dt)
        if node:
            out |= node - seen_a
            seen_b |= node
        node = tree_a.get(dt)
        if node:
            seen_a |= node
    # cases whose start pairs a pair filter dropped have no known first b
    out |= index.observed_in[b] - seen_b
    return out


def _precedes_ids(index: TemporalIndex, cmp: str, a, b, delta: int) -> set[int]:
    ids = _order_ids(index, cmp, a, b, delta)
    if b is None:
        return ids
    if a is None:
        return ids | index.observed_in[b]
    return ids | _b_first(index, a, b)


def _atom_ids(index: TemporalIndex, q: AtomicQuery) -> set[int]:
    b = index.activity_ids.get(q.target)
    if q.code == "EXISTS":
        return set() if b is None else set(index.observed_in[b])
    if q.code == "ABSENT":
        everything = set(index.all_case_ids())
        return everything if b is None else everything - index.observed_in[b]
    a = index.activity_ids.get(q.source)
    delta = q.delta_in(index.granularity)
    cmp = comparison(q.code)
    if q.code in ORDER_CODES:
        return _order_ids(index, cmp, a, b, delta)
    if q.code in SUBSTITUTE_CODES:
        return _substitute_ids(index, cmp, a, b, delta)
    return _precedes_ids(index, cmp, a, b, delta)


def _expr_ids(index: TemporalIndex, expr: RuleExpr) -> set[int]:
    if isinstance(expr, AtomicQuery):
        return _atom_ids(index, expr)
    if isinstance(expr, Not):
        return set(index.all_case_ids()) - _expr_ids(index, expr.operand)
    parts = [_expr_ids(index, o) for o in expr.operands]
    if isinstance(expr, And):
        return set.intersection(*parts)
    if isinstance(expr, Or):
        return set.union(*parts)
    raise TypeError(f"not a rule expression: {expr!r}")


def _result(index: TemporalIndex, ids) -> QueryResult:
    return QueryResult(frozenset(index.labels(ids)), len(index.case_ids))


def eval_expr(index: TemporalIndex, expr: RuleExpr | str) -> QueryResult:
    """Evaluate a rule (parsed or as text).  NOT complements against all indexed cases."""
    if isinstance(expr, str):
        expr = parse_rule(expr)
    return _result(index, _expr_ids(index, expr))


def _ids(index, label):
    return None if label is None else index.activity_ids.get(label)


def eval_order(index: TemporalIndex, code: str, source: str, target: str, delta: int) -> QueryResult:
    if code not in ORDER_CODES:
        raise ValueError(f"{code} is not one of {ORDER_CODES}")
    return _result(index, _order_ids(index, code, _ids(index, source), _ids(index, target), delta))


def eval_substitute(index: TemporalIndex, code: str, source: str, target: str, delta: int) -> QueryResult:
    if code not in SUBSTITUTE_CODES:
        raise ValueError(f"{code} is not one of {SUBSTITUTE_CODES}")
    ids = _substitute_ids(index, comparison(code), _ids(index, source), _ids(index, target), delta)
    return _result(index, ids)


def eval_precedes(index: TemporalIndex, code: str, source: str, target: str, delta: int) -> QueryResult:
    if code not in PRECEDES_CODES:
        raise ValueError(f"{code} is not one of {PRECEDES_CODES}")
    ids = _precedes_ids(index, comparison(code), _ids(index, source), _ids(index, target), delta)
    return _result(index, ids)


def eval_existence(index: TemporalIndex, activity: str) -> QueryResult:
    return _result(index, _atom_ids(index, AtomicQuery("EXISTS", None, activity)))


def eval_absence(index: TemporalIndex, activity: str) -> QueryResult:
    return _result(index, _atom_ids(index, AtomicQuery("ABSENT", None, activity)))


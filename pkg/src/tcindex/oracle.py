"""Brute-force rule evaluation by scanning the log.

Deliberately independent of the index and query engine: it re-derives every
answer from the raw events, so it can serve as ground truth in tests.  Cost
is quadratic in trace length.
"""

from __future__ import annotations

from .log import EventLog, to_bucket
from .rules import And, AtomicQuery, Not, Or, QueryResult, RuleExpr


def _cases(log: EventLog, granularity: str) -> dict[str, list[tuple[str, int]]]:
    cases: dict[str, list[tuple[str, int]]] = {}
    for e in log:
        cases.setdefault(e.case_label, []).append(
            (e.activity_label, to_bucket(e.timestamp, granularity))
        )
    return cases


def _holds(code: str, gap: int, delta: int) -> bool:
    if code.startswith("MAX"):
        return gap >= delta
    if code.startswith("MIN"):
        return gap <= delta
    return gap == delta


def _pair_match(trace, a, b, code, delta) -> bool:
    for i, (ai, ti) in enumerate(trace):
        if ai != a:
            continue
        for bj, tj in trace[i + 1:]:
            if bj == b and _holds(code, tj - ti, delta):
                return True
    return False


def _matches(trace, q: AtomicQuery, delta) -> bool:
    names = [act for act, _ in trace]
    if q.code == "EXISTS":
        return q.target in names
    if q.code == "ABSENT":
        return q.target not in names
    a, b = q.source, q.target
    if q.code in ("MAX", "MIN", "EXACT"):
        return _pair_match(trace, a, b, q.code, delta)
    start = trace[0][1]
    if q.code in ("MAXS", "MINS", "EXACTS"):
        if a in names:
            return False
        return any(act == b and _holds(q.code, t - start, delta) for act, t in trace)
    # precedes family
    if _pair_match(trace, a, b, q.code, delta):
        return True
    if b not in names:
        return False
    if a not in names:
        return True
    first_a = min(t for act, t in trace if act == a) - start
    first_b = min(t for act, t in trace if act == b) - start
    return first_b <= first_a


def _eval(cases, q: AtomicQuery, granularity: str) -> set[str]:
    delta = None if q.delta is None else q.delta_in(granularity)
    return {label for label, trace in cases.items() if _matches(trace, q, delta)}


def _expr(cases, expr: RuleExpr, granularity: str) -> set[str]:
    if isinstance(expr, AtomicQuery):
        return _eval(cases, expr, granularity)
    if isinstance(expr, Not):
        return set(cases) - _expr(cases, expr.operand, granularity)
    parts = [_expr(cases, o, granularity) for o in expr.operands]
    if isinstance(expr, And):
        return set.intersection(*parts)
    if isinstance(expr, Or):
        return set.union(*parts)
    raise TypeError(f"not a rule expression: {expr!r}")


def brute_force_eval(log: EventLog, q: AtomicQuery, granularity: str) -> QueryResult:
    cases = _cases(log, granularity)
    return QueryResult(frozenset(_eval(cases, q, granularity)), len(cases))


def brute_force_expr(log: EventLog, expr: RuleExpr, granularity: str) -> QueryResult:
    cases = _cases(log, granularity)
    return QueryResult(frozenset(_expr(cases, expr, granularity)), len(cases))


def brute_force_many(log: EventLog, exprs, granularity: str) -> list[QueryResult]:
    """Evaluate several rules, grouping the log into traces only once."""
    cases = _cases(log, granularity)
    return [QueryResult(frozenset(_expr(cases, e, granularity)), len(cases)) for e in exprs]

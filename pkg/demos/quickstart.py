"""Index a tiny log and ask a few temporal questions."""

from datetime import datetime, timedelta, timezone

from tcindex import Event, EventLog, build_index, eval_expr

t0 = datetime(2021, 1, 1, tzinfo=timezone.utc)
steps = {
    "c1": [("A", 0), ("B", 5)],
    "c2": [("A", 0), ("B", 20)],
    "c3": [("B", 3)],
    "c4": [("A", 2)],
}
log = EventLog.from_events(
    Event(case, act, t0 + timedelta(minutes=m)) for case, evs in steps.items() for act, m in evs
)

index = build_index(log, "minute")
print(index.stats().line())

# B at least 10 minutes after A
print(eval_expr(index, "MAX(A,B,10)").sorted())       # ['c2']
# B within 10 minutes of A
print(eval_expr(index, "MIN(A,B,10)").sorted())       # ['c1']
# B without any A, at most 5 minutes into the case
print(eval_expr(index, "MINS(A,B,5)").sorted())       # ['c3']
# late B, or B not preceded by A
print(eval_expr(index, "MAXP(A,B,10)").sorted())      # ['c2', 'c3']
print(eval_expr(index, "EXISTS(A) AND NOT MIN(A,B,10)").sorted())  # ['c2', 'c4']

# units are converted to the index granularity
print(eval_expr(index, "MIN(A,B,1h)").sorted())       # ['c1', 'c2']

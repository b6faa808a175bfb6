"""Build time per event and query time as the log grows."""

import time

from tcindex import LogProfile, build_index, eval_expr, generate
from tcindex.synth import max_case_span, random_rules

for events in (10_000, 50_000, 200_000):
    p = LogProfile(traces=events // 20, alphabet_size=25, avg_length=20, max_length=40,
                   time_horizon=365 * 86400, seed=1)
    log = generate(p)
    t = time.perf_counter()
    index = build_index(log, "hour")
    build = time.perf_counter() - t

    rules = random_rules(log.activity_labels(), max_case_span(log, "hour"), 100, seed=0)
    t = time.perf_counter()
    hits = sum(eval_expr(index, q).count for q in rules)
    query = time.perf_counter() - t
    print(f"{len(log):>8} events  {build / len(log) * 1e9:6.0f} ns/event  "
          f"100 queries {query * 1000:6.1f} ms  hits={hits}")

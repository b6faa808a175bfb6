"""Grow an index fragment by fragment, saving and reloading in between."""

import tempfile
from pathlib import Path

from tcindex import (
    LogProfile,
    TemporalIndex,
    build_index,
    eval_expr,
    generate,
    load_index,
    save_index,
    split_by_timeframe,
)
from tcindex.synth import max_case_span, random_rules

log = generate(LogProfile(traces=2000, alphabet_size=8, avg_length=6, max_length=15, seed=4))
parts = split_by_timeframe(log, 5)
print([len(p) for p in parts])  # events per time window

path = Path(tempfile.mkdtemp()) / "index.csv"
index = TemporalIndex("hour")
for i, part in enumerate(parts):
    if i:
        index = load_index(path)
    index.ingest_many(part.events)
    save_index(index, path)
    print(i, index.stats().line())

whole = build_index(log, "hour")
print("same as one-shot build:", load_index(path) == whole)

rules = random_rules(log.activity_labels(), max_case_span(log, "hour"), 5, seed=1)
for q in rules:
    print(q, eval_expr(index, q).count)

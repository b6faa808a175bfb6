"""Temporal compliance checking over event logs.

Build a :class:`TemporalIndex` from an :class:`EventLog`, then evaluate
order and time-window rules against it::

    from tcindex import IngestionConfig, read_log, build_index, eval_expr

    log = read_log("orders.csv", IngestionConfig())
    index = build_index(log, "hour")
    eval_expr(index, "MAX(Create order,Ship order,48) AND NOT EXISTS(Cancel)")
"""

from .index import (
    IndexFrozenError,
    IndexStats,
    OrderViolation,
    TemporalIndex,
    build_index,
    check_invariants,
    index_stats,
    ingest_event,
)
from .log import (
    ConfigError,
    Event,
    EventLog,
    IngestionConfig,
    LogParseError,
    apply_lifecycle,
    parse_csv,
    parse_xes,
    read_log,
    to_bucket,
    write_csv,
)
from .oracle import brute_force_eval, brute_force_expr, brute_force_many
from .persist import ArchiveError, load_index, save_index
from .query import (
    eval_absence,
    eval_existence,
    eval_expr,
    eval_order,
    eval_precedes,
    eval_substitute,
)
from .rules import And, AtomicQuery, Not, Or, QueryResult, RuleSyntaxError, parse_rule
from .synth import (
    BPIC12_LIKE,
    BPIC13CP_LIKE,
    LogProfile,
    generate,
    load_profile,
    split_by_timeframe,
    split_by_traces,
)
from .tree import DeltaTree, tree_at, tree_head, tree_tail

__version__ = "0.1.0"

"""Command line: build, query, update, repl, verify and bench.

Exit status is 0 on success, 1 when an operation fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
import time

from . import index as index_mod
from .index import IndexFrozenError, OrderViolation
from .log import (
    FORMATS,
    GRANULARITIES,
    LIFECYCLE_MODES,
    ConfigError,
    IngestionConfig,
    LogParseError,
    read_log,
)
from .oracle import brute_force_expr
from .persist import ArchiveError, load_index, save_index
from .query import eval_expr
from .rules import CODES, PAIR_CODES, RuleSyntaxError, parse_rule
from .synth import (
    generate,
    load_profile,
    max_case_span,
    random_rules,
    split_by_timeframe,
    split_by_traces,
)

BENCH_HEADER = (
    "mode", "row", "events", "traces", "read_ms", "save_ms", "load_ms", "build_ms",
    "q5_ms", "q10_ms", "q50_ms", "q100_ms", "hits5", "hits10", "hits50", "hits100",
)
BATCHES = (5, 10, 50, 100)


class CommandError(Exception):
    """Reported on stderr with exit status 1."""


def _ms(seconds: float) -> str:
    return f"{seconds * 1000:.3f}"


def _add_log_options(p, with_granularity=True):
    p.add_argument("--log", required=True, help="event log file")
    p.add_argument("--format", choices=FORMATS, help="log format (default: from file extension)")
    if with_granularity:
        p.add_argument("--granularity", choices=GRANULARITIES, default="minute")
    p.add_argument("--csv-cols", default="case,activity,timestamp",
                   help="case,activity,time[,lifecycle] column names")
    p.add_argument("--time-format", help="strptime pattern (default: ISO-8601)")
    p.add_argument("--lifecycle", choices=LIFECYCLE_MODES, default="ignore")


def _config(args, granularity="minute") -> IngestionConfig:
    fmt = args.format
    if fmt is None:
        fmt = "xes" if str(args.log).lower().endswith(".xes") else "csv"
    cols = [c.strip() for c in args.csv_cols.split(",")]
    if len(cols) not in (3, 4):
        raise ConfigError("--csv-cols takes three or four comma-separated names")
    return IngestionConfig(
        format=fmt,
        case_column=cols[0],
        activity_column=cols[1],
        time_column=cols[2],
        lifecycle_column=cols[3] if len(cols) == 4 else None,
        time_format=args.time_format,
        granularity=granularity,
        lifecycle_mode=args.lifecycle,
    )


def _read_rules(args) -> list[tuple[str, object]]:
    if args.rule is not None:
        texts = [args.rule]
    else:
        with open(args.rules) as fh:
            texts = [line.strip() for line in fh]
        texts = [t for t in texts if t and not t.startswith("#")]
    rules = []
    for text in texts:
        try:
            rules.append((text, parse_rule(text)))
        except RuleSyntaxError as exc:
            raise CommandError(f"rule {text!r}: {exc}") from None
    return rules


# -- subcommands -------------------------------------------------------------


def cmd_build(args, out) -> int:
    cfg = _config(args, args.granularity)
    log = read_log(args.log, cfg)
    t0 = time.perf_counter()
    idx = index_mod.build_index(log, cfg.granularity, discard_lists=args.frozen)
    elapsed = time.perf_counter() - t0
    save_index(idx, args.out)
    print(f"{idx.stats().line()} build_ms={_ms(elapsed)}", file=out)
    return 0


def cmd_query(args, out) -> int:
    rules = _read_rules(args)
    idx = load_index(args.index)
    total_ns = 0
    total_hits = 0
    for text, expr in rules:
        t0 = time.perf_counter_ns()
        try:
            result = eval_expr(idx, expr)
        except ValueError as exc:
            raise CommandError(f"rule {text!r}: {exc}") from None
        ns = time.perf_counter_ns() - t0
        total_ns += ns
        total_hits += result.count
        micros = ns // 1000
        if args.output == "json":
            doc = {"rule": text, "count": result.count}
            if not args.count_only:
                doc["cases"] = result.sorted()
            doc["micros"] = micros
            print(json.dumps(doc), file=out)
        else:
            print(f"{text}\tcount={result.count}\tmicros={micros}", file=out)
            if not args.count_only:
                for label in result.sorted():
                    print(f"  {label}", file=out)
    if args.output == "text":
        print(f"cumulative: rules={len(rules)} hits={total_hits} micros={total_ns // 1000}",
              file=out)
    return 0


def cmd_update(args, out) -> int:
    t0 = time.perf_counter()
    idx = load_index(args.index)
    load_s = time.perf_counter() - t0
    if idx.frozen:
        raise CommandError(f"{args.index}: index is frozen and cannot be updated")
    t0 = time.perf_counter()
    log = read_log(args.log, _config(args, idx.granularity))
    idx.ingest_many(log.events)
    read_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    save_index(idx, args.out)
    save_s = time.perf_counter() - t0
    print(idx.stats().line(), file=out)
    print(f"R={_ms(read_s)}ms S={_ms(save_s)}ms L={_ms(load_s)}ms", file=out)
    return 0


REPL_HELP = "enter a rule, or :stats, :help, :quit"


def cmd_repl(args, out, stdin=None) -> int:
    stdin = stdin or sys.stdin
    idx = load_index(args.index)
    interactive = stdin.isatty()
    print(f"loaded {idx.stats().line()}; {REPL_HELP}", file=out)
    while True:
        if interactive:
            print("> ", end="", file=out, flush=True)
        line = stdin.readline()
        if not line:
            break
        line = line.strip()
        if not line:
            continue
        if line in (":quit", ":q", ":exit"):
            break
        if line == ":stats":
            print(idx.stats().line(), file=out)
            continue
        if line == ":help":
            print(REPL_HELP, file=out)
            continue
        try:
            expr = parse_rule(line)
            t0 = time.perf_counter_ns()
            result = eval_expr(idx, expr)
            micros = (time.perf_counter_ns() - t0) // 1000
        except ValueError as exc:
            print(f"error: {exc}", file=out)
            continue
        labels = result.sorted()
        print(f"count={result.count} micros={micros}", file=out)
        for label in labels[: args.limit]:
            print(f"  {label}", file=out)
        if len(labels) > args.limit:
            print(f"  ... {len(labels) - args.limit} more", file=out)
    return 0


def cmd_verify(args, out) -> int:
    cfg = _config(args, args.granularity)
    log = read_log(args.log, cfg)
    if args.rules is not None:
        args.rule = None
        rules = [expr for _, expr in _read_rules(args)]
    else:
        acts = log.activity_labels() or ["a"]
        rules = random_rules(acts, max_case_span(log, cfg.granularity), args.generate,
                             args.seed, CODES)
    idx = index_mod.build_index(log, cfg.granularity)
    for expr in rules:
        got = eval_expr(idx, expr).cases
        want = brute_force_expr(log, expr, cfg.granularity).cases
        if got != want:
            print(f"MISMATCH {expr}", file=out)
            print(f"  engine only: {sorted(got - want)}", file=out)
            print(f"  oracle only: {sorted(want - got)}", file=out)
            return 1
    print(f"OK {len(rules)} rules", file=out)
    return 0


def _run_batches(idx, rules):
    """Cumulative time and hits after the first 5, 10, 50 and 100 rules."""
    times, hits = {}, {}
    elapsed = 0
    total = 0
    for i, q in enumerate(rules, 1):
        t0 = time.perf_counter_ns()
        result = eval_expr(idx, q)
        elapsed += time.perf_counter_ns() - t0
        total += result.count
        if i in BATCHES:
            times[i] = f"{elapsed / 1e6:.3f}"
            hits[i] = total
    return times, hits


def cmd_bench(args, out) -> int:
    log = generate(args.profile_obj)
    g = args.granularity
    acts = log.activity_labels()
    rules = random_rules(acts, max_case_span(log, g), args.queries, args.seed, PAIR_CODES)
    rows = []
    extra = {}

    def row(name, events, traces, **cols):
        rows.append({"mode": args.mode, "row": name, "events": events, "traces": traces, **cols})

    if args.mode == "exp1":
        t0 = time.perf_counter()
        idx = index_mod.build_index(log, g)
        build_s = time.perf_counter() - t0
    else:
        split = split_by_traces if args.mode == "exp2" else split_by_timeframe
        fragments = split(log, 5)
        with tempfile.TemporaryDirectory(dir=args.workdir) as tmp:
            path = os.path.join(tmp, "index.csv")
            idx = index_mod.TemporalIndex(g)
            sums = [0.0, 0.0, 0.0]
            for i, frag in enumerate(fragments, 1):
                load_s = 0.0
                if i > 1:
                    t0 = time.perf_counter()
                    idx = load_index(path)
                    load_s = time.perf_counter() - t0
                t0 = time.perf_counter()
                idx.ingest_many(frag.events)
                read_s = time.perf_counter() - t0
                t0 = time.perf_counter()
                save_index(idx, path)
                save_s = time.perf_counter() - t0
                sums[0] += read_s
                sums[1] += save_s
                sums[2] += load_s
                row(f"fragment{i}", len(frag), len(frag.case_labels()),
                    read_ms=_ms(read_s), save_ms=_ms(save_s), load_ms=_ms(load_s))
        build_s = sums[0]
        extra = {"read_ms": _ms(sums[0]), "save_ms": _ms(sums[1]), "load_ms": _ms(sums[2])}
    times, hits = _run_batches(idx, rules)
    totals = {f"q{b}_ms": times.get(b, "") for b in BATCHES}
    totals.update({f"hits{b}": hits.get(b, "") for b in BATCHES})
    name = "all" if args.mode == "exp1" else "total"
    row(name, len(log), len(log.case_labels()), build_ms=_ms(build_s), **extra, **totals)

    writer = csv.DictWriter(out, fieldnames=BENCH_HEADER, restval="", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return 0


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tcindex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="index an event log and save the archive")
    _add_log_options(p)
    p.add_argument("--out", required=True, help="archive path to write")
    p.add_argument("--frozen", action="store_true",
                   help="drop per-case lists; the archive cannot be updated later")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="evaluate rules against a saved index")
    p.add_argument("--index", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rule")
    g.add_argument("--rules", help="file with one rule per line")
    p.add_argument("--output", choices=("text", "json"), default="text")
    p.add_argument("--count-only", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("update", help="ingest a log fragment into a saved index")
    p.add_argument("--index", required=True)
    _add_log_options(p, with_granularity=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_update)

    p = sub.add_parser("repl", help="interactive rule shell")
    p.add_argument("--index", required=True)
    p.add_argument("--limit", type=int, default=10, help="case labels shown per answer")
    p.set_defaults(func=cmd_repl)

    p = sub.add_parser("verify", help="compare engine answers with a brute-force scan")
    _add_log_options(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rules", help="file with one rule per line")
    g.add_argument("--generate", type=int, metavar="N", help="check N random rules")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run an experiment on a synthetic log")
    p.add_argument("--profile", required=True, help="INI file with a [profile] section")
    p.add_argument("--mode", choices=("exp1", "exp2", "exp3"), default="exp1")
    p.add_argument("--queries", type=int, default=100)
    p.add_argument("--granularity", choices=GRANULARITIES, default="hour")
    p.add_argument("--seed", type=int, default=0, help="seed for the mixed queries")
    p.add_argument("--workdir", help="directory for intermediate archives")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench":
        try:
            args.profile_obj = load_profile(args.profile)
        except (OSError, ValueError) as exc:
            parser.error(f"invalid profile: {exc}")
        if args.queries < 0:
            parser.error("--queries must be non-negative")
    try:
        return args.func(args, out)
    except (CommandError, ConfigError, LogParseError, ArchiveError,
            IndexFrozenError, OrderViolation, OSError) as exc:
        print(f"tcindex {args.command}: {exc}", file=sys.stderr)
        return 1


def run():
    sys.exit(main())

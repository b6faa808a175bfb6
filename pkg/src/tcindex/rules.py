"""Compliance rule expressions and their textual grammar.

::

    expr := atom | NOT expr | expr AND expr | expr OR expr | ( expr )
    atom := CODE(A, B, delta) | EXISTS(A) | ABSENT(A)

NOT binds tightest, then AND, then OR.  Keywords and codes are
case-insensitive.  Activity labels containing commas, parentheses or quotes
are written in double quotes with backslash escapes.  ``delta`` is a
non-negative integer in the index's bucket unit, or carries a unit suffix
(``90m``, ``36h``, ``2d``) that is converted when the rule is evaluated.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .log import UNIT_SECONDS

ORDER_CODES = ("MAX", "MIN", "EXACT")
SUBSTITUTE_CODES = ("MAXS", "MINS", "EXACTS")
PRECEDES_CODES = ("MAXP", "MINP", "EXACTP")
PAIR_CODES = ORDER_CODES + SUBSTITUTE_CODES + PRECEDES_CODES
OCCURRENCE_CODES = ("EXISTS", "ABSENT")
CODES = PAIR_CODES + OCCURRENCE_CODES

_UNIT_SUFFIXES = {
    "m": "minute", "min": "minute", "mins": "minute", "minute": "minute", "minutes": "minute",
    "h": "hour", "hour": "hour", "hours": "hour",
    "d": "day", "day": "day", "days": "day",
}
_UNIT_SHORT = {"minute": "m", "hour": "h", "day": "d"}


class RuleSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


def comparison(code: str) -> str:
    """The MAX/MIN/EXACT comparison underlying a pair code."""
    if code in ORDER_CODES:
        return code
    if code in SUBSTITUTE_CODES or code in PRECEDES_CODES:
        return code[:-1]
    raise ValueError(f"{code} has no time comparison")


@dataclass(frozen=True)
class AtomicQuery:
    code: str
    source: Optional[str]
    target: str
    delta: Optional[int] = None
    unit: Optional[str] = None  # None: delta is already in index buckets

    def __post_init__(self):
        if self.code not in CODES:
            raise ValueError(f"unknown query code {self.code!r}")
        if self.code in PAIR_CODES:
            if self.source is None or self.delta is None:
                raise ValueError(f"{self.code} needs a source, a target and a delta")
            if self.delta < 0:
                raise ValueError(f"negative delta {self.delta}")
        elif self.source is not None or self.delta is not None:
            raise ValueError(f"{self.code} takes a single activity")
        if self.unit is not None and self.unit not in UNIT_SECONDS:
            raise ValueError(f"unknown unit {self.unit!r}")

    def delta_in(self, granularity: str) -> int:
        """Delta expressed in buckets of *granularity*."""
        if self.unit is None:
            return self.delta
        seconds = self.delta * UNIT_SECONDS[self.unit]
        per_bucket = UNIT_SECONDS[granularity]
        if seconds % per_bucket:
            raise ValueError(
                f"{self.delta}{_UNIT_SHORT[self.unit]} is not a whole number of "
                f"{granularity}s"
            )
        return seconds // per_bucket

    def __str__(self) -> str:
        if self.code in OCCURRENCE_CODES:
            return f"{self.code}({quote_label(self.target)})"
        d = str(self.delta) + (_UNIT_SHORT[self.unit] if self.unit else "")
        return f"{self.code}({quote_label(self.source)},{quote_label(self.target)},{d})"


@dataclass(frozen=True)
class Not:
    operand: "RuleExpr"

    def __str__(self) -> str:
        inner = self.operand
        s = str(inner)
        return f"NOT ({s})" if isinstance(inner, (And, Or)) else f"NOT {s}"


@dataclass(frozen=True)
class And:
    operands: tuple

    def __str__(self) -> str:
        return " AND ".join(
            f"({o})" if isinstance(o, (And, Or)) else str(o) for o in self.operands
        )


@dataclass(frozen=True)
class Or:
    operands: tuple

    def __str__(self) -> str:
        return " OR ".join(f"({o})" if isinstance(o, Or) else str(o) for o in self.operands)


RuleExpr = Union[AtomicQuery, Not, And, Or]


@dataclass(frozen=True)
class QueryResult:
    """Matching case labels; ``universe_hint`` is the number of cases queried."""

    cases: frozenset
    universe_hint: int = 0

    @property
    def count(self) -> int:
        return len(self.cases)

    def sorted(self) -> list[str]:
        return sorted(self.cases)

    def __len__(self) -> int:
        return len(self.cases)


_NEEDS_QUOTES = re.compile(r'[,()"\\]|^\s|\s$|^$')


def quote_label(label: str) -> str:
    if _NEEDS_QUOTES.search(label):
        return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return label


def atoms(expr: RuleExpr):
    """Yield the atomic queries of *expr*, left to right."""
    if isinstance(expr, AtomicQuery):
        yield expr
    elif isinstance(expr, Not):
        yield from atoms(expr.operand)
    else:
        for o in expr.operands:
            yield from atoms(o)


_WORD = re.compile(r"[A-Za-z_]+")
_BARE = re.compile(r'[^,()"]*')
_QUOTED = re.compile(r'"((?:[^"\\]|\\.)*)"', re.S)
_ESCAPE = re.compile(r"\\(.)", re.S)
_DELTA = re.compile(r"\s*(-?\d+)\s*([A-Za-z]*)\s*")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message, pos=None):
        return RuleSyntaxError(message, self.pos if pos is None else pos, self.text)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek_word(self):
        self.skip()
        m = _WORD.match(self.text, self.pos)
        return m.group(0).upper() if m else None

    def take_word(self):
        m = _WORD.match(self.text, self.pos)
        self.pos = m.end()

    def expect(self, ch):
        self.skip()
        if not self.text.startswith(ch, self.pos):
            found = self.text[self.pos] if self.pos < len(self.text) else "end of input"
            raise self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def parse(self) -> RuleExpr:
        expr = self.parse_or()
        self.skip()
        if self.pos != len(self.text):
            raise self.error(f"unexpected {self.text[self.pos]!r}")
        return expr

    def parse_or(self):
        items = [self.parse_and()]
        while self.peek_word() == "OR":
            self.take_word()
            items.append(self.parse_and())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def parse_and(self):
        items = [self.parse_unary()]
        while self.peek_word() == "AND":
            self.take_word()
            items.append(self.parse_unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def parse_unary(self):
        word = self.peek_word()
        if word == "NOT":
            self.take_word()
            return Not(self.parse_unary())
        if self.text.startswith("(", self.pos):
            self.pos += 1
            expr = self.parse_or()
            self.expect(")")
            return expr
        if word is None:
            if self.pos >= len(self.text):
                raise self.error("unexpected end of rule")
            raise self.error(f"expected a query, found {self.text[self.pos]!r}")
        return self.parse_atom()

    def parse_atom(self):
        start = self.pos
        code = self.peek_word()
        if code not in CODES:
            raise self.error(f"unknown query code {code!r}", start)
        self.take_word()
        self.expect("(")
        if code in OCCURRENCE_CODES:
            target = self.parse_label()
            self.expect(")")
            return AtomicQuery(code, None, target)
        source = self.parse_label()
        self.expect(",")
        target = self.parse_label()
        self.skip()
        if not self.text.startswith(",", self.pos):
            raise self.error(f"{code} needs three arguments (source, target, delta)")
        self.pos += 1
        delta, unit = self.parse_delta()
        self.expect(")")
        return AtomicQuery(code, source, target, delta, unit)

    def parse_label(self):
        self.skip()
        start = self.pos
        m = _QUOTED.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return _ESCAPE.sub(r"\1", m.group(1))
        if self.text.startswith('"', self.pos):
            raise self.error("unterminated quoted label")
        m = _BARE.match(self.text, self.pos)
        label = m.group(0).strip()
        if not label:
            raise self.error("expected an activity label", start)
        self.pos = m.end()
        return label

    def parse_delta(self):
        start = self.pos
        m = _DELTA.match(self.text, self.pos)
        if not m:
            raise self.error("expected an integer delta", start)
        value = int(m.group(1))
        if value < 0:
            raise self.error(f"negative delta {value}", start)
        unit = None
        if m.group(2):
            unit = _UNIT_SUFFIXES.get(m.group(2).lower())
            if unit is None:
                raise self.error(f"unknown time unit {m.group(2)!r}", start)
        self.pos = m.end()
        return value, unit


def parse_rule(text: str) -> RuleExpr:
    return _Parser(text).parse()

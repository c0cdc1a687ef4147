"""Tokenizer for the structured text subset.

Keywords are case-insensitive (stored upper-cased in ``Token.value``),
identifiers are case-sensitive.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass

from ..errors import StSyntaxError

KEYWORDS = frozenset("""
    PROGRAM END_PROGRAM FUNCTION_BLOCK END_FUNCTION_BLOCK FUNCTION END_FUNCTION
    VAR VAR_INPUT VAR_OUTPUT VAR_GLOBAL END_VAR TYPE END_TYPE STRUCT END_STRUCT
    IF THEN ELSIF ELSE END_IF CASE OF END_CASE WHILE DO END_WHILE
    FOR TO BY END_FOR RETURN AND OR XOR NOT MOD TRUE FALSE
    STEP INITIAL TRANSITION FROM ACTION END_ACTION
    REPEAT UNTIL END_REPEAT EXIT VAR_IN_OUT POINTER ARRAY REF_TO AT
""".split())

# recognised so that they produce a clear error instead of an odd parse
UNSUPPORTED = frozenset(
    "REPEAT UNTIL END_REPEAT EXIT VAR_IN_OUT POINTER ARRAY REF_TO AT".split())

_TIME_UNITS = {"d": 86_400_000, "h": 3_600_000, "m": 60_000, "s": 1000,
               "ms": 1}
_TIME_PART = re.compile(r"(\d+(?:\.\d+)?)(ms|d|h|m|s)", re.IGNORECASE)

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<bcomment>\(\*.*?\*\))
  | (?P<lcomment>//[^\n]*)
  | (?P<time>(?:TIME|T)\#-?[0-9_.a-zA-Z]+)
  | (?P<based>(?:2|8|16)\#[0-9A-Fa-f_]+)
  | (?P<real>\d[\d_]*\.\d[\d_]*(?:[eE][+-]?\d+)?|\d[\d_]*[eE][+-]?\d+)
  | (?P<int>\d[\d_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|=>|<=|>=|<>|\.\.|[-+*/=<>(),;:.&\[\]])
""", re.VERBOSE | re.DOTALL | re.IGNORECASE)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str          # ident | kw | int | real | time | bool | op | eof
    text: str
    value: object
    start: int
    end: int
    line: int
    col: int

    def is_kw(self, *names: str) -> bool:
        return self.kind == "kw" and self.value in names

    def is_op(self, *ops: str) -> bool:
        return self.kind == "op" and self.value in ops

    @property
    def canonical(self) -> str:
        """Token text used for checksums: keywords upper-cased."""
        if self.kind in ("kw", "bool"):
            return str(self.text).upper()
        return self.text


def parse_time_literal(text: str) -> int:
    """Convert ``T#1m30s``-style text to milliseconds."""
    body = text.split("#", 1)[1].replace("_", "")
    sign = 1
    if body.startswith("-"):
        sign, body = -1, body[1:]
    pos = 0
    total = 0.0
    for m in _TIME_PART.finditer(body):
        if m.start() != pos:
            raise ValueError(text)
        total += float(m.group(1)) * _TIME_UNITS[m.group(2).lower()]
        pos = m.end()
    if pos != len(body) or pos == 0:
        raise ValueError(text)
    return sign * int(round(total))


def _line_starts(source: str) -> list[int]:
    starts = [0]
    for i, ch in enumerate(source):
        if ch == "\n":
            starts.append(i + 1)
    return starts


def tokenize(source: str, file: str | None = None,
             keep_comments: bool = False) -> list[Token]:
    starts = _line_starts(source)

    def position(offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(starts, offset)
        return line, offset - starts[line - 1] + 1

    tokens: list[Token] = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            line, col = position(pos)
            if source.startswith("(*", pos):
                raise StSyntaxError("unterminated comment", file, line, col)
            raise StSyntaxError(f"unexpected character {source[pos]!r}",
                                file, line, col)
        kind = m.lastgroup
        text = m.group()
        start, end = m.span()
        pos = end
        if kind == "ws":
            continue
        if kind in ("bcomment", "lcomment"):
            if keep_comments:
                line, col = position(start)
                tokens.append(Token("comment", text, text, start, end, line, col))
            continue
        line, col = position(start)
        value: object = text
        if kind == "time":
            try:
                value = parse_time_literal(text)
            except ValueError:
                raise StSyntaxError(f"malformed TIME literal {text!r}",
                                    file, line, col) from None
        elif kind == "based":
            base, digits = text.split("#", 1)
            value = int(digits.replace("_", ""), int(base))
            kind = "int"
        elif kind == "int":
            value = int(text.replace("_", ""))
        elif kind == "real":
            value = float(text.replace("_", ""))
        elif kind == "ident":
            upper = text.upper()
            if upper in ("TRUE", "FALSE"):
                kind, value = "bool", upper == "TRUE"
            elif upper in KEYWORDS:
                kind, value = "kw", upper
        elif kind == "op":
            value = text
        tokens.append(Token(kind, text, value, start, end, line, col))
    line, col = position(n)
    tokens.append(Token("eof", "", None, n, n, line, col))
    return tokens


def normalized_text(source: str) -> str:
    """Token stream joined by single spaces; comments and layout dropped."""
    return " ".join(t.canonical for t in tokenize(source) if t.kind != "eof")

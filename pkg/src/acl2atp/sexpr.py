"""Reader and printer for the S-expression syntax of ACL2 world dumps.

The reader is iterative (explicit stack), so arbitrarily deep input either
parses or fails with a positioned :class:`SexprError`; it never overflows the
Python stack.  Supported syntax: ``;`` comments, strings, ``|...|`` and
backslash escapes in symbols, ``'x`` quote shorthand, ``PKG::NAME`` package
prefixes, integers, ratios and dotted pairs.  Reader macros other than the
quote (``#\\c``, backquote, comma) are rejected.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

DEFAULT_PACKAGE = "ACL2"
# Packages whose symbols are accessible in ACL2 without a prefix.
IMPLICIT_PACKAGES = frozenset({"ACL2", "COMMON-LISP"})


class SexprError(Exception):
    """Positioned reader error."""

    def __init__(self, message: str, line: int, col: int, path: Optional[str] = None):
        self.message = message
        self.line = line
        self.col = col
        self.path = path
        super().__init__(str(self))

    def __str__(self) -> str:
        where = f"{self.line}:{self.col}"
        if self.path:
            where = f"{self.path}:{where}"
        return f"{where}: {self.message}"


@dataclass(frozen=True)
class Sym:
    name: str
    package: str = DEFAULT_PACKAGE


@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class Ratio:
    value: Fraction

    @property
    def numerator(self) -> int:
        return self.value.numerator

    @property
    def denominator(self) -> int:
        return self.value.denominator


@dataclass(frozen=True)
class Str:
    value: str


@dataclass(frozen=True)
class Quote:
    inner: "Sexpr"


@dataclass(frozen=True)
class SList:
    """Non-empty list; ``tail`` is the cdr of the last cons for dotted lists."""

    items: tuple
    tail: Optional["Sexpr"] = None


Sexpr = Union[Sym, Int, Ratio, Str, Quote, SList]

NIL = Sym("NIL")
T = Sym("T")


def make_list(items, tail: Optional[Sexpr] = None) -> Sexpr:
    """Build a list in canonical form (``()`` is NIL, no list or NIL tails)."""
    items = tuple(items)
    while isinstance(tail, SList):
        items = items + tail.items
        tail = tail.tail
    if tail == NIL:
        tail = None
    if not items:
        return NIL if tail is None else tail
    return SList(items, tail)


def make_number(value: Fraction | int) -> Sexpr:
    value = Fraction(value)
    if value.denominator == 1:
        return Int(value.numerator)
    return Ratio(value)


# --------------------------------------------------------------------------
# Tokenizer

_DELIMS = frozenset(" \t\n\r\f\v()'\";`,")
_INT_RE = re.compile(r"[+-]?\d+\.?\Z")
_RATIO_RE = re.compile(r"([+-]?\d+)/(\d+)\Z")
_FLOAT_RE = re.compile(
    r"[+-]?(\d*\.\d+([esfdlESFDL][+-]?\d+)?|\d+(\.\d*)?[esfdlESFDL][+-]?\d+)\Z"
)

_LPAREN, _RPAREN, _QUOTE, _DOT, _ATOM = range(5)


class _Reader:
    def __init__(self, text: str, path: Optional[str]):
        self.text = text
        self.path = path
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def error(self, message: str, pos: int) -> SexprError:
        line = bisect.bisect_right(self.line_starts, pos) - 1
        return SexprError(message, line + 1, pos - self.line_starts[line] + 1, self.path)

    def tokens(self) -> Iterator[tuple]:
        text = self.text
        n = len(text)
        i = 0
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
            elif c == ";":
                j = text.find("\n", i)
                i = n if j < 0 else j + 1
            elif c == "(":
                yield _LPAREN, None, i
                i += 1
            elif c == ")":
                yield _RPAREN, None, i
                i += 1
            elif c == "'":
                yield _QUOTE, None, i
                i += 1
            elif c == '"':
                value, j = self.read_string(i)
                yield _ATOM, Str(value), i
                i = j
            elif c in "`,":
                raise self.error(f"unsupported reader macro {c!r}", i)
            elif c == "#":
                raise self.error("unsupported reader macro '#'", i)
            else:
                kind, value, j = self.read_token(i)
                yield kind, value, i
                i = j

    def read_string(self, start: int) -> tuple[str, int]:
        text = self.text
        out = []
        i = start + 1
        while i < len(text):
            c = text[i]
            if c == '"':
                return "".join(out), i + 1
            if c == "\\":
                i += 1
                if i >= len(text):
                    break
                c = text[i]
            out.append(c)
            i += 1
        raise self.error("unterminated string", start)

    def read_token(self, start: int) -> tuple:
        text = self.text
        n = len(text)
        chars: list[str] = []
        escaped: list[bool] = []
        i = start
        while i < n and text[i] not in _DELIMS:
            c = text[i]
            if c == "\\":
                if i + 1 >= n:
                    raise self.error("backslash escape at end of input", i)
                chars.append(text[i + 1])
                escaped.append(True)
                i += 2
            elif c == "|":
                bar = i
                i += 1
                while True:
                    if i >= n:
                        raise self.error("unterminated |-escape", bar)
                    c = text[i]
                    if c == "|":
                        i += 1
                        break
                    if c == "\\":
                        if i + 1 >= n:
                            raise self.error("unterminated |-escape", bar)
                        c = text[i + 1]
                        i += 1
                    chars.append(c)
                    escaped.append(True)
                    i += 1
            else:
                chars.append(c)
                escaped.append(False)
                i += 1
        raw = "".join(chars)
        if not any(escaped):
            if raw == ".":
                return _DOT, None, i
            if set(raw) == {"."}:
                raise self.error("token consisting only of dots", start)
            if _INT_RE.match(raw):
                return _ATOM, Int(int(raw.rstrip("."))), i
            m = _RATIO_RE.match(raw)
            if m:
                den = int(m.group(2))
                if den == 0:
                    raise self.error("ratio with zero denominator", start)
                return _ATOM, make_number(Fraction(int(m.group(1)), den)), i
            if _FLOAT_RE.match(raw):
                raise self.error("floating-point literals are not supported", start)
        return _ATOM, self.make_symbol(chars, escaped, start), i

    def make_symbol(self, chars: list[str], escaped: list[bool], start: int) -> Sym:
        colons = [k for k, (c, e) in enumerate(zip(chars, escaped)) if c == ":" and not e]

        def fold(lo: int, hi: int) -> str:
            return "".join(
                c if e else c.upper() for c, e in zip(chars[lo:hi], escaped[lo:hi])
            )

        if not colons:
            package, name = DEFAULT_PACKAGE, fold(0, len(chars))
        elif colons == [0]:
            package, name = "KEYWORD", fold(1, len(chars))
        elif len(colons) == 1 and colons[0] > 0:
            package, name = fold(0, colons[0]), fold(colons[0] + 1, len(chars))
        elif len(colons) == 2 and colons[1] == colons[0] + 1 and colons[0] > 0:
            package, name = fold(0, colons[0]), fold(colons[1] + 1, len(chars))
        else:
            raise self.error("malformed package marker", start)
        if not name:
            raise self.error("empty symbol name", start)
        return Sym(name, package)

    def parse(self) -> list[Sexpr]:
        results: list[Sexpr] = []
        # Frames: ["quote", pos] or ["list", pos, items, dot_pos, tail]
        stack: list[list] = []
        for kind, value, pos in self.tokens():
            if kind == _LPAREN:
                stack.append(["list", pos, [], None, None])
                continue
            if kind == _QUOTE:
                stack.append(["quote", pos])
                continue
            if kind == _DOT:
                frame = stack[-1] if stack else None
                if frame is None or frame[0] != "list" or not frame[2] or frame[3] is not None:
                    raise self.error("stray '.'", pos)
                frame[3] = pos
                continue
            if kind == _RPAREN:
                if not stack:
                    raise self.error("unbalanced ')'", pos)
                frame = stack.pop()
                if frame[0] == "quote":
                    raise self.error("quote followed by ')'", frame[1])
                if frame[3] is not None and frame[4] is None:
                    raise self.error("'.' without a following datum", frame[3])
                datum = make_list(frame[2], frame[4])
            else:
                datum = value
            while stack and stack[-1][0] == "quote":
                stack.pop()
                datum = Quote(datum)
            if not stack:
                results.append(datum)
                continue
            frame = stack[-1]
            if frame[3] is None:
                frame[2].append(datum)
            elif frame[4] is None:
                frame[4] = datum
            else:
                raise self.error("more than one datum after '.'", pos)
        if stack:
            frame = stack[-1]
            if frame[0] == "quote":
                raise self.error("quote at end of input", frame[1])
            raise self.error("unbalanced '(' (list not closed)", frame[1])
        return results


def parse_sexprs(text: str, path: Optional[str] = None) -> list[Sexpr]:
    """Parse every top-level datum in ``text``.

    Raises :class:`SexprError` with line/column on malformed input; nothing
    is returned for a partially valid file.
    """
    return _Reader(text, path).parse()


def parse_sexpr(text: str) -> Sexpr:
    data = parse_sexprs(text)
    if len(data) != 1:
        raise SexprError(f"expected exactly one datum, found {len(data)}", 1, 1)
    return data[0]


# --------------------------------------------------------------------------
# Printer

_SAFE_SYMBOL_CHARS = frozenset(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789!$%&*+-./<=>?@[]^_{}~"
)


def _needs_bars(name: str) -> bool:
    if not name or any(c not in _SAFE_SYMBOL_CHARS for c in name):
        return True
    if set(name) == {"."}:
        return True
    return bool(_INT_RE.match(name) or _RATIO_RE.match(name) or _FLOAT_RE.match(name))


def _print_name(name: str) -> str:
    if not _needs_bars(name):
        return name
    # Whitespace is escaped too, so a printed symbol never contains blanks.
    body = "".join("\\" + c if c in "|\\" or c.isspace() else c for c in name)
    return f"|{body}|"


def symbol_text(sym: Sym) -> str:
    """Printed form of a symbol, omitting prefixes of implicit packages."""
    if sym.package in IMPLICIT_PACKAGES:
        return _print_name(sym.name)
    if sym.package == "KEYWORD":
        return ":" + _print_name(sym.name)
    return f"{_print_name(sym.package)}::{_print_name(sym.name)}"


def print_sexpr(datum: Sexpr) -> str:
    if isinstance(datum, Sym):
        if datum.package == DEFAULT_PACKAGE:
            return _print_name(datum.name)
        if datum.package == "KEYWORD":
            return ":" + _print_name(datum.name)
        return f"{_print_name(datum.package)}::{_print_name(datum.name)}"
    if isinstance(datum, Int):
        return str(datum.value)
    if isinstance(datum, Ratio):
        return f"{datum.numerator}/{datum.denominator}"
    if isinstance(datum, Str):
        body = datum.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{body}"'
    if isinstance(datum, Quote):
        return "'" + print_sexpr(datum.inner)
    if isinstance(datum, SList):
        inner = " ".join(print_sexpr(x) for x in datum.items)
        if datum.tail is not None:
            inner += " . " + print_sexpr(datum.tail)
        return f"({inner})"
    raise TypeError(f"not an S-expression: {datum!r}")

"""TPTP FOF syntax: formula trees, a canonical printer and a subset parser.

The parser covers the ``fof(...)`` and ``include(...)`` statements and the
full first-order connective set.  Explicit parentheses are kept as
:class:`Group` nodes so the printer can reproduce hand-written layouts;
:func:`strip_groups` removes them for structural comparison.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

PLAIN_ATOM_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
VARIABLE_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


class FofSyntaxError(ValueError):
    pass


def render_atom(raw: str) -> str:
    """Print an atom, single-quoting it when it is not a plain lower word."""
    if PLAIN_ATOM_RE.match(raw):
        return raw
    return "'" + raw.replace("\\", "\\\\").replace("'", "\\'") + "'"


# --------------------------------------------------------------------------
# Trees


@dataclass(frozen=True)
class FVar:
    name: str


@dataclass(frozen=True)
class FFun:
    """Function or constant; ``atom`` is the printed (possibly quoted) form."""

    atom: str
    args: tuple = ()


FofTerm = Union[FVar, FFun]


@dataclass(frozen=True)
class Eq:
    left: FofTerm
    right: FofTerm


@dataclass(frozen=True)
class Neq:
    left: FofTerm
    right: FofTerm


@dataclass(frozen=True)
class Pred:
    term: FofTerm


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Quant:
    quantifier: str
    variables: tuple
    body: "Formula"


@dataclass(frozen=True)
class Group:
    inner: "Formula"


Formula = Union[Eq, Neq, Pred, Not, Bin, Quant, Group]

ASSOCIATIVE_OPS = ("&", "|")
BINARY_OPS = ("<=>", "<~>", "=>", "<=", "~|", "~&", "&", "|")


@dataclass(frozen=True)
class FofFormula:
    """A named ``fof`` statement.  ``source`` holds verbatim text for
    formulas that must be emitted exactly as transcribed."""

    name: str
    role: str
    body: Formula
    source: Optional[str] = field(default=None, compare=False)


# --------------------------------------------------------------------------
# Printer


def print_term(t: FofTerm) -> str:
    if isinstance(t, FVar):
        return t.name
    if not t.args:
        return t.atom
    return f"{t.atom}({','.join(print_term(a) for a in t.args)})"


def _unit(f: Formula) -> str:
    if isinstance(f, Bin):
        return f"({print_formula(f)})"
    return print_formula(f)


def _operand(f: Formula) -> str:
    if isinstance(f, (Bin, Quant)):
        return f"({print_formula(f)})"
    return print_formula(f)


def print_formula(f: Formula) -> str:
    if isinstance(f, Eq):
        return f"{print_term(f.left)} = {print_term(f.right)}"
    if isinstance(f, Neq):
        return f"{print_term(f.left)} != {print_term(f.right)}"
    if isinstance(f, Pred):
        return print_term(f.term)
    if isinstance(f, Group):
        return f"({print_formula(f.inner)})"
    if isinstance(f, Not):
        return "~ " + _unit(f.arg)
    if isinstance(f, Quant):
        return f"{f.quantifier} [{','.join(f.variables)}] : {_unit(f.body)}"
    if isinstance(f, Bin):
        return f"{_operand(f.left)} {f.op} {_operand(f.right)}"
    raise TypeError(f"not a formula: {f!r}")


def print_fof(f: FofFormula) -> str:
    """Canonical single-line ``fof(name,role,(...)).`` clause."""
    return f"fof({f.name},{f.role},({print_formula(f.body)}))."


def fof_text(f: FofFormula) -> str:
    """Text written to problem files: verbatim source when present."""
    return f.source if f.source is not None else print_fof(f)


# --------------------------------------------------------------------------
# Analysis


def strip_groups(f: Formula) -> Formula:
    if isinstance(f, Group):
        return strip_groups(f.inner)
    if isinstance(f, Not):
        return Not(strip_groups(f.arg))
    if isinstance(f, Bin):
        return Bin(f.op, strip_groups(f.left), strip_groups(f.right))
    if isinstance(f, Quant):
        return Quant(f.quantifier, f.variables, strip_groups(f.body))
    return f


def _term_vars(t: FofTerm, out: dict) -> None:
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, FVar):
            out.setdefault(t.name)
        else:
            stack.extend(reversed(t.args))


def free_variables(f: Formula, bound: frozenset = frozenset()) -> set[str]:
    if isinstance(f, (Eq, Neq)):
        names: dict = {}
        _term_vars(f.left, names)
        _term_vars(f.right, names)
        return set(names) - bound
    if isinstance(f, Pred):
        names = {}
        _term_vars(f.term, names)
        return set(names) - bound
    if isinstance(f, Group):
        return free_variables(f.inner, bound)
    if isinstance(f, Not):
        return free_variables(f.arg, bound)
    if isinstance(f, Bin):
        return free_variables(f.left, bound) | free_variables(f.right, bound)
    if isinstance(f, Quant):
        return free_variables(f.body, bound | frozenset(f.variables))
    raise TypeError(f"not a formula: {f!r}")


def iter_terms(f: Formula):
    """Every term occurrence (including nested subterms) in a formula."""
    if isinstance(f, (Eq, Neq)):
        roots = [f.left, f.right]
    elif isinstance(f, Pred):
        roots = [f.term]
    elif isinstance(f, Group):
        yield from iter_terms(f.inner)
        return
    elif isinstance(f, Not):
        yield from iter_terms(f.arg)
        return
    elif isinstance(f, Bin):
        yield from iter_terms(f.left)
        yield from iter_terms(f.right)
        return
    else:
        yield from iter_terms(f.body)
        return
    stack = roots[::-1]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, FFun):
            stack.extend(reversed(t.args))


def symbol_arities(formulas) -> dict[str, set[int]]:
    """Map from printed atom to every arity it is used with."""
    table: dict[str, set[int]] = {}
    for f in formulas:
        body = f.body if isinstance(f, FofFormula) else f
        for t in iter_terms(body):
            if isinstance(t, FFun):
                table.setdefault(t.atom, set()).add(len(t.args))
    return table


# --------------------------------------------------------------------------
# Parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*|/\*.*?\*/)
  | (?P<sq>'(?:[^'\\]|\\.)+')
  | (?P<dq>"(?:[^"\\]|\\.)*")
  | (?P<num>[+-]?\d+(?:/\d+|\.\d+(?:[eE][+-]?\d+)?|[eE][+-]?\d+)?)
  | (?P<upper>[A-Z][A-Za-z0-9_]*)
  | (?P<lower>[a-z][A-Za-z0-9_]*)
  | (?P<dollar>\$\$?[a-z][A-Za-z0-9_]*)
  | (?P<op><=>|<~>|=>|<=|~\||~&|!=|[=~&|!?()\[\],.:])
    """,
    re.VERBOSE | re.DOTALL,
)


def _unescape_quoted(tok: str) -> str:
    return re.sub(r"\\(.)", r"\1", tok[1:-1])


@dataclass
class TptpFile:
    formulas: list
    includes: list


class _Parser:
    def __init__(self, text: str):
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m:
                raise FofSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
            if m.lastgroup != "ws":
                self.toks.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.i = 0

    def peek(self) -> tuple[str, str]:
        if self.i < len(self.toks):
            kind, val, _ = self.toks[self.i]
            return kind, val
        return "eof", ""

    def next(self) -> tuple[str, str]:
        tok = self.peek()
        if tok[0] == "eof":
            raise FofSyntaxError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val = self.next()
        if val != value or kind in ("sq", "dq"):
            raise FofSyntaxError(f"expected {value!r}, found {val!r}")

    def at(self, value: str) -> bool:
        kind, val = self.peek()
        return kind == "op" and val == value

    def parse_file(self) -> TptpFile:
        formulas, includes = [], []
        while self.peek()[0] != "eof":
            kind, val = self.next()
            if kind == "lower" and val == "fof":
                formulas.append(self.parse_annotated())
            elif kind == "lower" and val == "include":
                self.expect("(")
                kind, path = self.next()
                if kind != "sq":
                    raise FofSyntaxError("include expects a quoted file name")
                if self.at(","):
                    self.next()
                    self.skip_balanced()
                self.expect(")")
                self.expect(".")
                includes.append(_unescape_quoted(path))
            else:
                raise FofSyntaxError(f"expected fof or include, found {val!r}")
        return TptpFile(formulas, includes)

    def skip_balanced(self) -> None:
        depth = 0
        while True:
            kind, val = self.peek()
            if kind == "eof":
                raise FofSyntaxError("unbalanced annotation")
            if kind == "op" and val in "([":
                depth += 1
            elif kind == "op" and val in ")]":
                if depth == 0:
                    return
                depth -= 1
            self.next()

    def parse_annotated(self) -> FofFormula:
        self.expect("(")
        kind, val = self.next()
        if kind in ("lower", "sq"):
            name = render_atom(_unescape_quoted(val) if kind == "sq" else val)
        elif kind == "num" and val.isdigit():
            name = val
        else:
            raise FofSyntaxError(f"bad formula name {val!r}")
        self.expect(",")
        kind, role = self.next()
        if kind != "lower":
            raise FofSyntaxError(f"bad role {role!r}")
        self.expect(",")
        body = self.parse_formula()
        if self.at(","):
            self.next()
            self.skip_balanced()
        self.expect(")")
        self.expect(".")
        if isinstance(body, Group):
            body = body.inner
        return FofFormula(name, role, body)

    def parse_formula(self) -> Formula:
        left = self.parse_unit()
        kind, val = self.peek()
        if kind != "op" or val not in BINARY_OPS:
            return left
        op = val
        self.next()
        right = self.parse_unit()
        if op in ASSOCIATIVE_OPS:
            left = Bin(op, left, right)
            while self.at(op):
                self.next()
                left = Bin(op, left, self.parse_unit())
        else:
            left = Bin(op, left, right)
        kind, val = self.peek()
        if kind == "op" and val in BINARY_OPS:
            raise FofSyntaxError(f"ambiguous use of {val!r} after {op!r}; parenthesize")
        return left

    def parse_unit(self) -> Formula:
        kind, val = self.peek()
        if kind == "op" and val == "(":
            self.next()
            inner = self.parse_formula()
            self.expect(")")
            return Group(inner)
        if kind == "op" and val in "!?":
            self.next()
            self.expect("[")
            names = []
            while True:
                kind, name = self.next()
                if kind != "upper":
                    raise FofSyntaxError(f"expected variable, found {name!r}")
                names.append(name)
                if self.at(","):
                    self.next()
                    continue
                self.expect("]")
                break
            self.expect(":")
            return Quant(val, tuple(names), self.parse_unit())
        if kind == "op" and val == "~":
            self.next()
            return Not(self.parse_unit())
        left = self.parse_term()
        if self.at("="):
            self.next()
            return Eq(left, self.parse_term())
        if self.at("!="):
            self.next()
            return Neq(left, self.parse_term())
        if isinstance(left, FVar):
            raise FofSyntaxError(f"variable {left.name} used as a formula")
        return Pred(left)

    def parse_term(self) -> FofTerm:
        kind, val = self.next()
        if kind == "upper":
            return FVar(val)
        if kind == "sq":
            atom = render_atom(_unescape_quoted(val))
        elif kind in ("lower", "dollar", "num", "dq"):
            atom = val
        else:
            raise FofSyntaxError(f"expected term, found {val!r}")
        args = []
        if self.at("(") and kind not in ("num", "dq"):
            self.next()
            while True:
                args.append(self.parse_term())
                if self.at(","):
                    self.next()
                    continue
                self.expect(")")
                break
        return FFun(atom, tuple(args))


def parse_tptp(text: str) -> TptpFile:
    return _Parser(text).parse_file()


def parse_fof(text: str) -> list[FofFormula]:
    """Parse the ``fof`` statements of a TPTP text (includes are ignored)."""
    return parse_tptp(text).formulas


def parse_fof_formula(text: str) -> FofFormula:
    formulas = parse_fof(text)
    if len(formulas) != 1:
        raise FofSyntaxError(f"expected one formula, found {len(formulas)}")
    return formulas[0]

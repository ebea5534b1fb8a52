"""Translation of lambda-free ACL2 terms to TPTP FOF.

Every formula ``phi`` becomes ``! [Vars] : phi' != nil`` where ``phi'`` is
the term with ACL2 names mapped to TPTP atoms.  Symbols used at several
arities get distinct atoms (see :func:`build_arity_table`), and quoted data
become ``cons`` spines over ``qsym_`` atoms.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from acl2atp.fof import (
    VARIABLE_RE,
    FFun,
    FofFormula,
    FofTerm,
    FVar,
    Neq,
    Quant,
    parse_fof_formula,
    render_atom,
)
from acl2atp.sexpr import (
    IMPLICIT_PACKAGES,
    Int,
    Quote,
    Ratio,
    Sexpr,
    SList,
    Str,
    Sym,
    parse_sexpr,
    symbol_text,
)
from acl2atp.terms import (
    AclTerm,
    App,
    ConstNum,
    ConstQuoted,
    ConstStr,
    ConstSym,
    Lambda,
    Var,
    remove_lambdas,
    subterms,
    to_term,
    variables,
)


class TranslationError(RuntimeError):
    """Internal inconsistency between a term and the arity table."""


SPECIAL_AXIOMS_TEXT = """\
fof(spcax1,axiom, t != nil).
fof(spcax2,axiom, ! [X,Y]: ((X = Y) <=> acleq(X,Y) = t)).
fof(spcax3,axiom, ! [X,Y]: ((X != Y) <=> acleq(X,Y) = nil)).
fof(spcax4,axiom, ! [B,C]: (if(nil,B,C) = C)).
fof(spcax5,axiom, ! [A,B,C]: ((A != nil) => if(A,B,C) = B)).
fof(spcax6,axiom, ! [A]: (not(A) = if(A, nil, t))).
fof(spcax7,axiom, ! [P,Q]: (implies(P,Q) = if(P,if(Q,t,nil),t))).
fof(spcax8,axiom, ! [P,Q]: (iff(P,Q) = and(implies(P,Q),implies(Q,P)))).
fof(and,axiom, ! [A,B]: (and(A,B) = if(A,B,nil))).
fof(or,axiom, ! [A,B]: or(A,B) = if(A,A,B)).
fof(consp1, axiom, ! [A,B]: acleq(consp(cons(A,B)),t) != nil).
fof(consp2, axiom, ! [X]: or(acleq(consp(X),t),acleq(consp(X),nil)) != nil).
fof(consp3, axiom, ! [X]: implies(consp(X),acleq(cons(car(X),cdr(X)),X)) != nil).
"""

# (ACL2 symbol, arity) -> atom fixed by the special axioms.
RESERVED_FUNCTIONS = {
    ("EQUAL", 2): "acleq",
    ("IF", 3): "if",
    ("NOT", 1): "not",
    ("IMPLIES", 2): "implies",
    ("IFF", 2): "iff",
    ("AND", 2): "and",
    ("OR", 2): "or",
    ("CONS", 2): "cons",
    ("CAR", 1): "car",
    ("CDR", 1): "cdr",
    ("CONSP", 1): "consp",
}
BASE_NAME_OVERRIDES = {"EQUAL": "acleq"}
TRUE_ATOM = "t"
NIL_ATOM = "nil"
NIL_TERM = FFun(NIL_ATOM)


@functools.lru_cache(maxsize=None)
def special_axioms() -> tuple[FofFormula, ...]:
    """The 13 axioms defining the ACL2 primitives, with verbatim source text."""
    out = []
    for line in SPECIAL_AXIOMS_TEXT.splitlines():
        parsed = parse_fof_formula(line)
        out.append(FofFormula(parsed.name, parsed.role, parsed.body, source=line))
    return tuple(out)


SPECIAL_AXIOM_NAMES = ("spcax1", "spcax2", "spcax3", "spcax4", "spcax5", "spcax6",
                       "spcax7", "spcax8", "and", "or", "consp1", "consp2", "consp3")


# --------------------------------------------------------------------------
# Name mangling


@functools.lru_cache(maxsize=65536)
def _symbol(text: str) -> Sym:
    datum = parse_sexpr(text)
    if not isinstance(datum, Sym):
        raise TranslationError(f"not a symbol text: {text!r}")
    return datum


def _printable(raw: str) -> str:
    return "".join(c if 32 <= ord(c) < 127 else f"_u{ord(c):04x}_" for c in raw)


def _clean(raw: str) -> str:
    return _printable(raw.replace("-", "_"))


def mangle_raw(text: str) -> str:
    """Unquoted TPTP spelling of an ACL2 symbol: lowercase, ``-`` to ``_``."""
    sym = _symbol(text)
    name = BASE_NAME_OVERRIDES.get(text, sym.name)
    if sym.package in IMPLICIT_PACKAGES:
        raw = name
    elif sym.package == "KEYWORD":
        raw = ":" + name
    else:
        raw = f"{sym.package}::{name}"
    return _clean(raw.lower())


def mangle_variable(symbol: str, used: Iterable[str]) -> str:
    """TPTP variable name for an ACL2 variable.

    Keeps the ACL2 spelling when it is usable as a TPTP variable (first
    letter upper-cased, ``-`` mapped to ``_``); otherwise, or on a clash with
    a name already in ``used``, returns the first free ``V1``, ``V2``, ...
    """
    used = set(used)
    name = _symbol(symbol).name.replace("-", "_")
    candidate = name[:1].upper() + name[1:]
    if VARIABLE_RE.match(candidate) and candidate not in used:
        return candidate
    k = 1
    while f"V{k}" in used:
        k += 1
    return f"V{k}"


def variable_map(term: AclTerm) -> dict[str, str]:
    out: dict[str, str] = {}
    for v in variables(term):
        out[v] = mangle_variable(v, out.values())
    return out


# --------------------------------------------------------------------------
# Arity table


def _number_text(value) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass
class ArityTable:
    """Atom assignment for every (symbol, arity) in a corpus.

    ``entries`` maps keys ``("fn", symbol, arity)``, ``("qsym", symbol, 0)``,
    ``("num", value, 0)`` and ``("str", text, 0)`` to unquoted atom names.
    """

    arities: dict = field(default_factory=dict)
    entries: dict = field(default_factory=dict)
    names: dict = field(default_factory=dict)
    _claimed: dict = field(default_factory=dict, repr=False)
    _claimed_names: set = field(default_factory=set, repr=False)

    def _claim(self, key: tuple, raw: str) -> str:
        ident = ("int", raw) if key[0] == "num" and raw.isdigit() else ("atom", raw)
        self._claimed[ident] = key
        self.entries[key] = raw
        return raw

    def _is_claimed(self, raw: str) -> bool:
        return ("atom", raw) in self._claimed

    def _fresh(self, key: tuple, candidate: str) -> str:
        while self._is_claimed(candidate):
            candidate += "_"
        return self._claim(key, candidate)

    def atom(self, key: tuple) -> str:
        try:
            raw = self.entries[key]
        except KeyError:
            raise TranslationError(f"no atom recorded for {key!r}") from None
        if key[0] == "num" and raw.isdigit():
            return raw
        return render_atom(raw)

    def function_atom(self, symbol: str, arity: int) -> str:
        return self.atom(("fn", symbol, arity))

    def formula_name(self, name: str) -> str:
        raw = self.names.get(name)
        if raw is None:
            raw = mangle_raw(name)
        return render_atom(raw)

    def add_names(self, names: Iterable[str]) -> None:
        for name in names:
            if name in self.names:
                continue
            candidate = mangle_raw(name)
            while candidate in self._claimed_names:
                candidate += "_"
            self._claimed_names.add(candidate)
            self.names[name] = candidate

    def atom_arities(self) -> dict[str, set[int]]:
        """Printed atom -> arities; singletons whenever the table is sound."""
        out: dict[str, set[int]] = {}
        for key in self.entries:
            out.setdefault(self.atom(key), set()).add(key[2])
        return out


def _datum_keys(datum: Sexpr, out: list) -> None:
    stack = [datum]
    while stack:
        d = stack.pop()
        if isinstance(d, Sym):
            text = symbol_text(d)
            if text not in ("T", "NIL"):
                out.append(("qsym", text, 0))
        elif isinstance(d, (Int, Ratio)):
            out.append(("num", Fraction(d.value), 0))
        elif isinstance(d, Str):
            out.append(("str", d.value, 0))
        elif isinstance(d, Quote):
            out.append(("fn", "CONS", 2))
            out.append(("qsym", "QUOTE", 0))
            stack.append(d.inner)
        else:
            out.extend([("fn", "CONS", 2)] * len(d.items))
            if d.tail is not None:
                stack.append(d.tail)
            stack.extend(reversed(d.items))


def term_keys(term: AclTerm) -> list[tuple]:
    """Table keys used by a term, in pre-order."""
    out: list[tuple] = []
    for t in subterms(term):
        if isinstance(t, App):
            if isinstance(t.fn, Lambda):
                raise TranslationError("lambda application left in term")
            out.append(("fn", t.fn, len(t.args)))
        elif isinstance(t, ConstSym):
            if t.name not in ("T", "NIL"):
                out.append(("qsym", t.name, 0))
        elif isinstance(t, ConstNum):
            out.append(("num", Fraction(t.value), 0))
        elif isinstance(t, ConstStr):
            out.append(("str", t.value, 0))
        elif isinstance(t, ConstQuoted):
            _datum_keys(t.datum, out)
    return out


def build_arity_table(terms: Iterable[AclTerm], names: Iterable[str] = ()) -> ArityTable:
    """Assign atoms to every symbol/arity pair, in chronological order.

    The first arity seen for a symbol keeps its base name; every further
    arity ``a`` gets ``base_a``.  Clashes with an already-claimed atom are
    resolved by appending ``_`` until the name is fresh.
    """
    table = ArityTable()
    for (symbol, arity), raw in RESERVED_FUNCTIONS.items():
        table.arities.setdefault(symbol, []).append(arity)
        table._claim(("fn", symbol, arity), raw)
    table._claim(("const", "T", 0), TRUE_ATOM)
    table._claim(("const", "NIL", 0), NIL_ATOM)
    table._claimed_names.update(SPECIAL_AXIOM_NAMES)

    order: dict[tuple, None] = {}
    for term in terms:
        for key in term_keys(term):
            order.setdefault(key)

    # Literal constants have fixed spellings.
    for key in order:
        if key in table.entries:
            continue
        if key[0] == "num":
            table._claim(key, _number_text(key[1]))
        elif key[0] == "str":
            table._fresh(key, '"' + _printable(key[1]) + '"')

    later = []
    for key in order:
        if key in table.entries or key[0] in ("num", "str"):
            continue
        kind, symbol, arity = key
        if kind == "qsym":
            table._fresh(key, "qsym_" + mangle_raw(symbol))
            continue
        seen = table.arities.setdefault(symbol, [])
        seen.append(arity)
        if len(seen) == 1:
            table._fresh(key, mangle_raw(symbol))
        else:
            later.append(key)
    for key in later:
        _, symbol, arity = key
        table._fresh(key, f"{mangle_raw(symbol)}_{arity}")

    table.add_names(names)
    return table


def mangle_function(symbol: str, arity: int, table: ArityTable) -> str:
    return table.function_atom(symbol, arity)


# --------------------------------------------------------------------------
# Translation


def _quoted(datum: Sexpr, table: ArityTable) -> FofTerm:
    if isinstance(datum, Sym):
        text = symbol_text(datum)
        if text == "T":
            return FFun(TRUE_ATOM)
        if text == "NIL":
            return NIL_TERM
        return FFun(table.atom(("qsym", text, 0)))
    if isinstance(datum, (Int, Ratio)):
        return FFun(table.atom(("num", Fraction(datum.value), 0)))
    if isinstance(datum, Str):
        return FFun(table.atom(("str", datum.value, 0)))
    cons = table.function_atom("CONS", 2)
    if isinstance(datum, Quote):
        quote = FFun(table.atom(("qsym", "QUOTE", 0)))
        return FFun(cons, (quote, FFun(cons, (_quoted(datum.inner, table), NIL_TERM))))
    spine = _quoted(datum.tail, table) if datum.tail is not None else NIL_TERM
    for item in reversed(datum.items):
        spine = FFun(cons, (_quoted(item, table), spine))
    return spine


def to_fof_term(term: AclTerm, table: ArityTable, varmap: dict[str, str]) -> FofTerm:
    if isinstance(term, Var):
        return FVar(varmap[term.name])
    if isinstance(term, ConstSym):
        if term.name == "T":
            return FFun(TRUE_ATOM)
        if term.name == "NIL":
            return NIL_TERM
        return FFun(table.atom(("qsym", term.name, 0)))
    if isinstance(term, ConstNum):
        return FFun(table.atom(("num", Fraction(term.value), 0)))
    if isinstance(term, ConstStr):
        return FFun(table.atom(("str", term.value, 0)))
    if isinstance(term, ConstQuoted):
        return _quoted(term.datum, table)
    if isinstance(term.fn, Lambda):
        raise TranslationError("lambda application left in term")
    atom = table.function_atom(term.fn, len(term.args))
    return FFun(atom, tuple(to_fof_term(a, table, varmap) for a in term.args))


def translate(name: str, role: str, term: AclTerm, table: ArityTable) -> FofFormula:
    """Encode a lambda-free term as the closed formula ``term != nil``."""
    varmap = variable_map(term)
    body = Neq(to_fof_term(term, table, varmap), NIL_TERM)
    if varmap:
        body = Quant("!", tuple(varmap.values()), body)
    return FofFormula(table.formula_name(name), role, body)


def translate_text(text: str, name: str, role: str = "axiom",
                   table: Optional[ArityTable] = None) -> FofFormula:
    """Convenience: translate one ACL2 formula given as text."""
    term = remove_lambdas(to_term(parse_sexpr(text)))
    if table is None:
        table = build_arity_table([term], [name])
    return translate(name, role, term, table)

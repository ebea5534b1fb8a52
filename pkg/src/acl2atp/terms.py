"""ACL2 terms: classification of raw data and lambda removal."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

from acl2atp.sexpr import Int, Quote, Ratio, Sexpr, SList, Str, Sym, print_sexpr, symbol_text


class MalformedTermError(ValueError):
    def __init__(self, message: str, subtree=None):
        self.subtree = subtree
        if subtree is not None:
            shown = print_sexpr(subtree) if not isinstance(subtree, AclTermBase) else repr(subtree)
            message = f"{message}: {shown[:200]}"
        super().__init__(message)


class AclTermBase:
    __slots__ = ()


@dataclass(frozen=True)
class Var(AclTermBase):
    name: str


@dataclass(frozen=True)
class ConstSym(AclTermBase):
    name: str


@dataclass(frozen=True)
class ConstNum(AclTermBase):
    value: Union[int, Fraction]


@dataclass(frozen=True)
class ConstStr(AclTermBase):
    value: str


@dataclass(frozen=True)
class ConstQuoted(AclTermBase):
    datum: Sexpr


@dataclass(frozen=True)
class Lambda(AclTermBase):
    params: tuple
    body: "AclTerm"


@dataclass(frozen=True)
class App(AclTermBase):
    """Function application; ``fn`` is a symbol text or, before lambda
    removal, a :class:`Lambda`."""

    fn: Union[str, Lambda]
    args: tuple = ()


AclTerm = Union[Var, ConstSym, ConstNum, ConstStr, ConstQuoted, App]

TRUE = ConstSym("T")
FALSE = ConstSym("NIL")
_CONSTANT_SYMBOLS = frozenset({"T", "NIL"})


def _is_named(datum: Sexpr, name: str) -> bool:
    return (isinstance(datum, Sym) and datum.name == name
            and datum.package in ("ACL2", "COMMON-LISP"))


def quoted_constant(datum: Sexpr) -> AclTerm:
    if isinstance(datum, Int):
        return ConstNum(datum.value)
    if isinstance(datum, Ratio):
        return ConstNum(datum.value)
    if isinstance(datum, Str):
        return ConstStr(datum.value)
    if isinstance(datum, Sym):
        return ConstSym(symbol_text(datum))
    return ConstQuoted(datum)


def to_term(datum: Sexpr) -> AclTerm:
    """Classify a macro-expanded formula body.

    Bare symbols are variables except ``T`` and ``NIL``; quoted data and
    self-evaluating atoms are constants; list heads are function symbols.
    ``((LAMBDA formals body) . args)`` is kept as an :class:`App` whose ``fn``
    is a :class:`Lambda`; see :func:`remove_lambdas`.
    """
    if isinstance(datum, Sym):
        text = symbol_text(datum)
        if text in _CONSTANT_SYMBOLS or datum.package == "KEYWORD":
            return ConstSym(text)
        return Var(text)
    if isinstance(datum, (Int, Ratio, Str)):
        return quoted_constant(datum)
    if isinstance(datum, Quote):
        return quoted_constant(datum.inner)
    if datum.tail is not None:
        raise MalformedTermError("dotted list in term position", datum)
    head, args = datum.items[0], datum.items[1:]
    if _is_named(head, "QUOTE"):
        if len(args) != 1:
            raise MalformedTermError("QUOTE takes exactly one argument", datum)
        return quoted_constant(args[0])
    if isinstance(head, Sym):
        return App(symbol_text(head), tuple(to_term(a) for a in args))
    if isinstance(head, SList) and _is_named(head.items[0], "LAMBDA"):
        return App(_to_lambda(head), tuple(to_term(a) for a in args))
    raise MalformedTermError("function position is neither a symbol nor a lambda", datum)


def _to_lambda(datum: SList) -> Lambda:
    if datum.tail is not None or len(datum.items) != 3:
        raise MalformedTermError("malformed lambda", datum)
    formals = datum.items[1]
    if _is_named(formals, "NIL"):
        params: tuple = ()
    elif isinstance(formals, SList) and formals.tail is None and all(
        isinstance(p, Sym) for p in formals.items
    ):
        params = tuple(symbol_text(p) for p in formals.items)
    else:
        raise MalformedTermError("lambda formals must be a list of symbols", datum)
    if len(set(params)) != len(params) or _CONSTANT_SYMBOLS & set(params):
        raise MalformedTermError("invalid lambda formals", datum)
    return Lambda(params, to_term(datum.items[2]))


def substitute(term: AclTerm, binding: dict) -> AclTerm:
    """Simultaneous substitution of variables; lambda bodies are closed over
    their formals, so substitution stops at a lambda."""
    if isinstance(term, Var):
        return binding.get(term.name, term)
    if isinstance(term, App):
        fn = term.fn
        return App(fn, tuple(substitute(a, binding) for a in term.args))
    return term


def remove_lambdas(term: AclTerm) -> AclTerm:
    """Beta-reduce every lambda application, innermost arguments first."""
    if not isinstance(term, App):
        return term
    args = tuple(remove_lambdas(a) for a in term.args)
    if isinstance(term.fn, Lambda):
        lam = term.fn
        if len(lam.params) != len(args):
            raise MalformedTermError(
                f"lambda with {len(lam.params)} formals applied to {len(args)} arguments", term
            )
        body = remove_lambdas(lam.body)
        return substitute(body, dict(zip(lam.params, args)))
    return App(term.fn, args)


def subterms(term: AclTerm) -> Iterator[AclTerm]:
    """Pre-order traversal of all subterm occurrences."""
    stack = [term]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, App):
            stack.extend(reversed(t.args))


def variables(term: AclTerm) -> list[str]:
    """Variable names in first-occurrence (left-to-right) order."""
    seen: dict[str, None] = {}
    for t in subterms(term):
        if isinstance(t, Var):
            seen.setdefault(t.name)
    return list(seen)


def has_lambda(term: AclTerm) -> bool:
    return any(isinstance(t, App) and isinstance(t.fn, Lambda) for t in subterms(term))


def has_quoted_dotted(term: AclTerm) -> bool:
    """True if a quoted constant contains a dotted pair."""
    for t in subterms(term):
        if isinstance(t, ConstQuoted):
            stack = [t.datum]
            while stack:
                d = stack.pop()
                if isinstance(d, SList):
                    if d.tail is not None:
                        return True
                    stack.extend(d.items)
                elif isinstance(d, Quote):
                    stack.append(d.inner)
    return False

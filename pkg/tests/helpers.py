"""Random generators and independent reference implementations for tests."""

from __future__ import annotations

import functools
import math
import random
from fractions import Fraction
from pathlib import Path

from acl2atp.corpus import Corpus, DepGraph, NamedFormula
from acl2atp.sexpr import Int, Str, Sym, make_list, print_sexpr
from acl2atp.terms import App, ConstNum, ConstQuoted, ConstStr, ConstSym, Lambda, Var

GOLDEN = Path(__file__).parent / "golden"

FUNCTIONS = ["F", "G", "H", "CONS", "CAR", "IF", "EQUAL", "BINARY-+", "E0-ORD-<", "<",
             "FOO-BAR", "FOO_BAR", "F_2", "|weird fn|", "RTL::FN", "QSYM_A"]
VARIABLES = ["X", "Y", "Z", "X1", "LST", "ACC", "|my var|", "V1", "N", "|x|"]


def random_constant(rng: random.Random):
    roll = rng.random()
    if roll < 0.25:
        return ConstSym(rng.choice(["T", "NIL"]))
    if roll < 0.45:
        return ConstNum(rng.choice([0, 1, 7, -1, -12, Fraction(1, 2), Fraction(-3, 4)]))
    if roll < 0.55:
        return ConstStr(rng.choice(["abc", "a-b", "it's", "x\\y"]))
    if roll < 0.75:
        return ConstSym(rng.choice(["A", "FOO", "QUOTE", "|lower|"]))
    items = tuple(Sym(s) for s in rng.sample(["A", "B", "C"], rng.randint(1, 3)))
    tail = Sym("D") if rng.random() < 0.3 else None
    return ConstQuoted(make_list(items + (Int(rng.randint(-2, 2)), Str("s")), tail))


def random_term(rng: random.Random, depth: int = 6, variables=None):
    """Random lambda-free term of the given maximum depth."""
    variables = variables if variables is not None else rng.sample(VARIABLES, rng.randint(1, 8))
    if depth <= 1 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return Var(rng.choice(variables))
        return random_constant(rng)
    fn = rng.choice(FUNCTIONS)
    arity = rng.randint(0, 3)
    return App(fn, tuple(random_term(rng, depth - 1, variables) for _ in range(arity)))


def random_lambda_term(rng: random.Random, depth: int, scope: list):
    """Random term whose lambda applications are closed over their formals."""
    if depth <= 1 or rng.random() < 0.2:
        return Var(rng.choice(scope)) if scope and rng.random() < 0.7 else random_constant(rng)
    if rng.random() < 0.4:
        params = tuple(rng.sample(["A", "B", "C", "D", "X", "Y"], rng.randint(1, 3)))
        body = random_lambda_term(rng, depth - 1, list(params))
        args = tuple(random_lambda_term(rng, depth - 1, scope) for _ in params)
        return App(Lambda(params, body), args)
    fn = rng.choice(["F", "G", "CONS"])
    return App(fn, tuple(random_lambda_term(rng, depth - 1, scope)
                         for _ in range(rng.randint(1, 3))))


def naive_beta(term):
    """Reference lambda removal: substitute the raw arguments, then recurse."""
    if isinstance(term, App):
        if isinstance(term.fn, Lambda):
            binding = dict(zip(term.fn.params, term.args))
            return naive_beta(_naive_subst(term.fn.body, binding))
        return App(term.fn, tuple(naive_beta(a) for a in term.args))
    return term


def _naive_subst(term, binding):
    if isinstance(term, Var):
        return binding.get(term.name, term)
    if isinstance(term, App):
        # Inner lambdas are closed: only their actual arguments see the binding.
        return App(term.fn, tuple(_naive_subst(a, binding) for a in term.args))
    return term


def enumerate_features(term) -> dict:
    """Reference feature extraction by explicit position enumeration."""
    positions = []

    def collect(t, path):
        positions.append((path, t))
        if isinstance(t, App):
            for i, a in enumerate(t.args):
                collect(a, path + (i,))

    collect(term, ())

    def render(t):
        if isinstance(t, Var):
            return "_"
        if isinstance(t, App):
            name = t.fn.lower().replace("-", "_")
            if t.fn == "EQUAL":
                name = "acleq"
            if not t.args:
                return name
            return name + "(" + ",".join(render(a) for a in t.args) + ")"
        if isinstance(t, ConstSym):
            return t.name.lower() if t.name in ("T", "NIL") else "qsym_" + t.name.lower()
        if isinstance(t, ConstNum):
            return str(t.value)
        if isinstance(t, ConstStr):
            return '"' + t.value + '"'
        return "'" + print_sexpr(t.datum)

    counts: dict = {}
    for _, t in positions:
        s = render(t)
        counts[s] = counts.get(s, 0) + 1
        if isinstance(t, App) and t.args:
            name = render(App(t.fn, ()))
            counts[name] = counts.get(name, 0) + 1
    return counts


# --------------------------------------------------------------------------
# Synthetic corpora and a brute-force k-NN scorer


def random_corpus(rng: random.Random, size: int, categories=("a",)):
    """Corpus of random formulas plus a chronologically valid DepGraph."""
    formulas = []
    for seq in range(size):
        term = random_term(rng, depth=rng.randint(2, 4), variables=["X", "Y", "Z"])
        kind = "theorem" if rng.random() < 0.75 else "definition"
        cat = rng.choice(categories)
        formulas.append(NamedFormula(f"F{seq:03d}", kind, term, seq, f"{cat}/b.world", cat))
    deps = {}
    for f in formulas:
        if f.kind == "theorem" and f.seq > 0 and rng.random() < 0.85:
            earlier = [g.name for g in formulas[: f.seq]]
            deps[f.name] = rng.sample(earlier, rng.randint(0, min(5, len(earlier))))
    return Corpus(formulas, []), DepGraph(deps)


def brute_force_rank(conj_vec, seq, corpus, deps, features, k, n):
    """Quadratic reference scorer written without the library's helpers."""
    prefix = [f for f in corpus.formulas if f.seq < seq]
    if not prefix:
        return []
    N = len(prefix)

    def weight(feat):
        df = sum(1 for f in prefix if feat in features[f.name])
        return math.log(N / max(df, 1))

    def sim(a, b):
        return math.fsum(weight(x) for x in sorted(set(a) & set(b)))

    cands = [f for f in prefix if f.name in deps.deps]
    sims = {f.name: sim(conj_vec, features[f.name]) for f in cands}

    def neighbor_cmp(a, b):
        if sims[a.name] != sims[b.name]:
            return -1 if sims[a.name] > sims[b.name] else 1
        if a.seq != b.seq:
            return -1 if a.seq > b.seq else 1
        return -1 if a.name < b.name else (1 if a.name > b.name else 0)

    neighbors = sorted(cands, key=functools.cmp_to_key(neighbor_cmp))[:k]
    names_before = {f.name: f.seq for f in prefix}
    scores = {}
    for p in names_before:
        parts = []
        for t in neighbors:
            if p in deps.deps[t.name] and p != t.name:
                parts.append(sims[t.name])
            if p == t.name:
                parts.append(sims[t.name])
        if parts:
            scores[p] = math.fsum(parts)
    ranked = [p for p in scores if scores[p] > 0]

    def premise_cmp(a, b):
        if scores[a] != scores[b]:
            return -1 if scores[a] > scores[b] else 1
        if names_before[a] != names_before[b]:
            return -1 if names_before[a] > names_before[b] else 1
        return -1 if a < b else 1

    ranked.sort(key=functools.cmp_to_key(premise_cmp))
    return [(p, scores[p]) for p in ranked[:n]]


def write_fake_prover(path: Path, body: str) -> Path:
    """Executable Python script standing in for an ATP."""
    import sys

    path.write_text(f"#!{sys.executable}\nimport sys, time\n{body}\n")
    path.chmod(0o755)
    return path

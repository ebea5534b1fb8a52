"""Premise selection: subterm features, TF-IDF weights and k-NN ranking.

A formula is described by the canonical prints of all its subterms, with
every variable replaced by ``_``, plus the function symbols it uses.  The
k nearest earlier formulas that have recorded proofs vote for their
dependencies (and for themselves) with their similarity to the goal.

All sums go through :func:`math.fsum`, so scores do not depend on the
order in which contributions are accumulated.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from acl2atp.corpus import Corpus, DepGraph
from acl2atp.sexpr import print_sexpr
from acl2atp.terms import AclTerm, App, ConstNum, ConstQuoted, ConstStr, ConstSym, Lambda, Var
from acl2atp.translate import _number_text, mangle_raw

PLACEHOLDER = "_"
DEFAULT_K = 40
DEFAULT_N = 100

FeatureVector = Counter


@dataclass(frozen=True)
class KnnConfig:
    k: int = DEFAULT_K
    n: int = DEFAULT_N

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise ValueError(f"k and n must be positive (k={self.k}, n={self.n})")


@dataclass
class Prediction:
    conjecture: str
    ranked: list = field(default_factory=list)

    @property
    def premises(self) -> list[str]:
        return [p for p, _ in self.ranked]

    def top(self, n: int) -> list[str]:
        return [p for p, _ in self.ranked[:n]]

    def __len__(self) -> int:
        return len(self.ranked)


def _symbol_feature(name: str) -> str:
    return mangle_raw(name)


def _constant_feature(term: AclTerm) -> str:
    if isinstance(term, ConstSym):
        if term.name in ("T", "NIL"):
            return term.name.lower()
        return "qsym_" + mangle_raw(term.name)
    if isinstance(term, ConstNum):
        return _number_text(term.value)
    if isinstance(term, ConstStr):
        return '"' + term.value + '"'
    if isinstance(term, ConstQuoted):
        return "'" + print_sexpr(term.datum)
    raise TypeError(f"not a constant: {term!r}")


def extract_features(term: AclTerm) -> FeatureVector:
    """Count every variable-normalized subterm and every function symbol."""
    counts: Counter = Counter()

    def walk(t: AclTerm) -> str:
        if isinstance(t, Var):
            s = PLACEHOLDER
        elif isinstance(t, App):
            if isinstance(t.fn, Lambda):
                raise ValueError("features need a lambda-free term")
            name = _symbol_feature(t.fn)
            if t.args:
                counts[name] += 1
                s = f"{name}({','.join(walk(a) for a in t.args)})"
            else:
                s = name
        else:
            s = _constant_feature(t)
        counts[s] += 1
        return s

    walk(term)
    return counts


def idf(n_docs: int, df: int) -> float:
    return math.log(n_docs / df)


@dataclass
class WeightMap:
    weights: dict
    n: int

    def __getitem__(self, feature: str) -> float:
        w = self.weights.get(feature)
        # Unseen features are maximally informative.
        return idf(self.n, 1) if w is None else w


def idf_weights(documents: Iterable[FeatureVector]) -> WeightMap:
    df: Counter = Counter()
    n = 0
    for doc in documents:
        n += 1
        df.update(doc.keys())
    if n == 0:
        raise ValueError("idf weights need at least one document")
    return WeightMap({f: idf(n, c) for f, c in df.items()}, n)


def similarity(a: FeatureVector, b: FeatureVector, w: WeightMap) -> float:
    """Sum of weights of the features the two vectors share."""
    if len(a) > len(b):
        a, b = b, a
    return math.fsum(w[f] for f in a if f in b)


def _ranked(scores: dict, seq_of) -> list:
    order = sorted((p for p, s in scores.items() if s > 0),
                   key=lambda p: (-scores[p], -seq_of(p), p))
    return [(p, scores[p]) for p in order]


def _vote(neighbors: list, sims: dict, deps: DepGraph, admissible) -> dict:
    contributions: dict = defaultdict(list)
    for t in neighbors:
        s = sims[t]
        contributions[t].append(s)
        for p in deps[t]:
            if p != t and admissible(p):
                contributions[p].append(s)
    return {p: math.fsum(v) for p, v in contributions.items()}


def corpus_features(corpus: Corpus) -> dict:
    return {f.name: extract_features(f.term) for f in corpus}


def rank_premises(conjecture: FeatureVector, seq: int, corpus: Corpus, deps: DepGraph,
                  cfg: KnnConfig = KnnConfig(), features: Optional[dict] = None,
                  name: str = "") -> Prediction:
    """Rank the formulas older than ``seq`` as premises for ``conjecture``.

    Weights are computed over exactly the formulas with a smaller ``seq``.
    Neighbors are drawn from those that have a recorded proof.  Ties are
    broken by newer formula first, then by name.
    """
    if features is None:
        features = corpus_features(corpus)
    prefix = [f for f in corpus if f.seq < seq]
    if not prefix:
        return Prediction(name, [])
    w = idf_weights(features[f.name] for f in prefix)
    seqs = {f.name: f.seq for f in prefix}
    candidates = [f for f in prefix if f.name in deps]
    sims = {f.name: similarity(conjecture, features[f.name], w) for f in candidates}
    neighbors = sorted(candidates, key=lambda f: (-sims[f.name], -f.seq, f.name))[: cfg.k]
    scores = _vote([f.name for f in neighbors], sims, deps, seqs.__contains__)
    return Prediction(name, _ranked(scores, seqs.__getitem__)[: cfg.n])


def predict_all(corpus: Corpus, deps: DepGraph, cfg: KnnConfig = KnnConfig(),
                features: Optional[dict] = None, per_category: bool = True) -> dict:
    """Predictions for every theorem, each using only older formulas.

    With ``per_category`` every book category is an independent corpus
    (features, weights, dependencies and order are all restricted to it).
    """
    if features is None:
        features = corpus_features(corpus)
    if not per_category:
        return _predict_chronological(corpus, deps, cfg, features)
    out = {}
    for category in corpus.categories():
        sub = corpus.restrict(category)
        out.update(_predict_chronological(sub, deps.restrict(sub.by_name), cfg, features))
    return {f.name: out[f.name] for f in corpus if f.name in out}


def _predict_chronological(corpus: Corpus, deps: DepGraph, cfg: KnnConfig,
                           features: dict) -> dict:
    # Incremental version of rank_premises: document frequencies and an
    # inverted index over neighbor candidates grow as the history advances.
    df: Counter = Counter()
    n_docs = 0
    index: dict = defaultdict(list)
    seqs: dict = {}
    out = {}
    for f in sorted(corpus, key=lambda x: x.seq):
        vec = features[f.name]
        if f.kind == "theorem":
            if n_docs == 0:
                out[f.name] = Prediction(f.name, [])
            else:
                shared: dict = defaultdict(list)
                for feat in vec:
                    c = df.get(feat, 0)
                    w = idf(n_docs, c if c else 1)
                    for t in index.get(feat, ()):
                        shared[t].append(w)
                sims = {t: math.fsum(ws) for t, ws in shared.items()}
                neighbors = sorted(sims, key=lambda t: (-sims[t], -seqs[t], t))[: cfg.k]
                scores = _vote(neighbors, sims, deps, seqs.__contains__)
                out[f.name] = Prediction(f.name, _ranked(scores, seqs.__getitem__)[: cfg.n])
        n_docs += 1
        df.update(vec.keys())
        seqs[f.name] = f.seq
        if f.name in deps:
            for feat in vec:
                index[feat].append(f.name)
    return out


def write_predictions(predictions: Iterable[Prediction], path) -> None:
    """One line per conjecture: ``name : premise1 premise2 ...``."""
    lines = []
    for p in predictions:
        lines.append(" ".join([p.conjecture, ":", *p.premises]).rstrip())
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_predictions(path) -> dict:
    """Inverse of :func:`write_predictions`; scores are not stored, so the
    returned predictions carry rank-derived placeholder scores."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 2 or parts[1] != ":":
            raise ValueError(f"{path}:{lineno}: expected 'name : premises...'")
        premises = parts[2:]
        ranked = [(p, float(len(premises) - i)) for i, p in enumerate(premises)]
        out[parts[0]] = Prediction(parts[0], ranked)
    return out

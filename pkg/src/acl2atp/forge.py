"""TPTP problem files for the reproving and premise-advice experiments."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional
from urllib.parse import quote

from acl2atp.corpus import Corpus, DepGraph
from acl2atp.fof import FofFormula, fof_text
from acl2atp.learn import Prediction
from acl2atp.translate import ArityTable, special_axioms, translate

log = logging.getLogger(__name__)


class ProblemError(ValueError):
    """The requested problem cannot be generated (bad kind, missing proof)."""


class SkipProblem(ProblemError):
    """Problem skipped because its recorded dependencies are unusable."""


@dataclass
class ProblemFile:
    conjecture_name: str
    category: str
    axioms: list
    conjecture: FofFormula
    origin: str

    @property
    def relpath(self) -> str:
        raw = self.conjecture.name
        if raw.startswith("'"):
            raw = re.sub(r"\\(.)", r"\1", raw[1:-1])
        stem = quote(raw, safe="_-+=<>*@$!~[]{}^")
        return f"{self.category or '_'}/{stem}.p"

    def render(self) -> str:
        lines = [f"% {self.origin} problem for {self.conjecture_name}"]
        lines.extend(fof_text(a) for a in self.axioms)
        lines.append(fof_text(self.conjecture))
        return "\n".join(lines) + "\n"

    def write(self, root) -> Path:
        path = Path(root) / self.relpath
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(), encoding="utf-8")
        return path


def _theorem(name: str, corpus: Corpus):
    if name not in corpus:
        raise ProblemError(f"unknown formula {name}")
    f = corpus[name]
    if f.kind != "theorem":
        raise ProblemError(f"{name} is a {f.kind}; only theorems are used as conjectures")
    return f


def _problem(f, premises: Iterable[str], corpus: Corpus, table: ArityTable,
             origin: str) -> ProblemFile:
    ordered = sorted(set(premises) - {f.name}, key=lambda p: corpus[p].seq)
    axioms = list(special_axioms())
    axioms.extend(translate(p, "axiom", corpus[p].term, table) for p in ordered)
    conjecture = translate(f.name, "conjecture", f.term, table)
    return ProblemFile(f.name, f.category, axioms, conjecture, origin)


def gen_reprove_problem(name: str, corpus: Corpus, deps: DepGraph,
                        table: ArityTable) -> ProblemFile:
    """Conjecture plus exactly the statements its ACL2 proof used."""
    f = _theorem(name, corpus)
    if name not in deps:
        raise SkipProblem(f"{name} has no recorded proof")
    if name in deps.incomplete:
        bad = [s for t, s in deps.dangling + deps.chronology if t == name]
        raise SkipProblem(f"{name} has unusable supporters: {' '.join(bad)}")
    return _problem(f, deps[name], corpus, table, "reprove")


def gen_advice_problem(name: str, corpus: Corpus, prediction: Optional[Prediction], n: int,
                       table: ArityTable) -> ProblemFile:
    """Conjecture plus the top ``n`` advised premises."""
    f = _theorem(name, corpus)
    premises = prediction.top(n) if prediction is not None else []
    unknown = [p for p in premises if p not in corpus]
    if unknown:
        raise ProblemError(f"prediction for {name} names unknown premises: {' '.join(unknown)}")
    return _problem(f, premises, corpus, table, "advice")


@dataclass
class BatchReport:
    written: list
    skipped: list

    def summary(self) -> dict:
        return {"problems": len(self.written), "skipped": len(self.skipped)}


def _write_batch(problems, out_dir: Path) -> BatchReport:
    out_dir.mkdir(parents=True, exist_ok=True)
    written, skipped, index = [], [], []
    for item in problems:
        if isinstance(item, tuple):
            skipped.append(item)
            log.info("skipped %s: %s", *item)
            continue
        item.write(out_dir)
        written.append(item)
        index.append(f"{item.relpath}\t{item.conjecture_name}\t{len(item.axioms)}\t{item.origin}")
    (out_dir / "index.tsv").write_text("".join(l + "\n" for l in index), encoding="utf-8")
    (out_dir / "skipped.tsv").write_text("".join(f"{n}\t{r}\n" for n, r in skipped),
                                         encoding="utf-8")
    return BatchReport(written, skipped)


def generate_reprove(corpus: Corpus, deps: DepGraph, table: ArityTable, out_dir,
                     categories: Optional[set] = None) -> BatchReport:
    """One problem per theorem with a recorded proof; incomplete ones are
    skipped and listed in ``skipped.tsv``."""
    def items():
        for f in corpus:
            if f.kind != "theorem" or f.name not in deps:
                continue
            if categories and f.category not in categories:
                continue
            try:
                yield gen_reprove_problem(f.name, corpus, deps, table)
            except SkipProblem as exc:
                yield (f.name, str(exc))

    return _write_batch(items(), Path(out_dir))


def generate_advice(corpus: Corpus, predictions: dict, n: int, table: ArityTable, out_dir,
                    categories: Optional[set] = None) -> BatchReport:
    def items():
        for f in corpus:
            if f.kind != "theorem":
                continue
            if categories and f.category not in categories:
                continue
            yield gen_advice_problem(f.name, corpus, predictions.get(f.name), n, table)

    return _write_batch(items(), Path(out_dir))

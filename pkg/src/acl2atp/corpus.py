"""World dumps, dependency files and corpus statistics.

World dump (``*.world``)::

    (EVENT THEOREM CDR-CONS (EQUAL (CDR (CONS X Y)) Y))
    (EVENT DEFINITION FOO (EQUAL (FOO X) ...))

Dependencies (``*.deps``)::

    (DEPS CDR-CONS-2 (CDR-CONS CAR-CONS))

A manifest lists world files, one per line, oldest first; blank lines and
lines starting with ``#`` are ignored.  Paths are relative to the manifest.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Iterable, Optional

from acl2atp.sexpr import SexprError, SList, Sym, parse_sexprs, symbol_text
from acl2atp.terms import AclTerm, MalformedTermError, has_quoted_dotted, remove_lambdas, to_term

log = logging.getLogger(__name__)

KINDS = {"THEOREM": "theorem", "DEFINITION": "definition"}


class CorpusError(ValueError):
    """Invalid dump, manifest or dependency file."""


@dataclass(frozen=True)
class NamedFormula:
    name: str
    kind: str
    term: AclTerm
    seq: int
    book: str
    category: str


@dataclass
class Corpus:
    formulas: list[NamedFormula] = field(default_factory=list)
    files: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.by_name = {f.name: f for f in self.formulas}

    def __len__(self) -> int:
        return len(self.formulas)

    def __iter__(self):
        return iter(self.formulas)

    def __getitem__(self, name: str) -> NamedFormula:
        return self.by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self.by_name

    def categories(self) -> list[str]:
        return sorted({f.category for f in self.formulas})

    def restrict(self, category: str) -> "Corpus":
        """Sub-corpus of one category; seq numbers are kept."""
        subset = [f for f in self.formulas if f.category == category]
        return Corpus(subset, list(dict.fromkeys(f.book for f in subset)))


def _category_of(path: str, root: Optional[Path]) -> str:
    p = Path(path)
    if root is not None:
        try:
            rel = p.resolve().relative_to(Path(root).resolve())
        except ValueError:
            rel = None
        if rel is not None and len(rel.parts) > 1:
            return rel.parts[0]
    return p.parent.name


def read_manifest(path) -> list[Path]:
    path = Path(path)
    base = path.parent
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(base / line)
    return out


def _read_data(path) -> list:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path}: not valid UTF-8 ({exc})") from None
    try:
        return parse_sexprs(text, str(path))
    except SexprError as exc:
        raise CorpusError(str(exc)) from None


def _head_is(datum, name: str) -> bool:
    return (isinstance(datum, SList) and isinstance(datum.items[0], Sym)
            and datum.items[0].name == name)


def load_world(paths: Iterable, root=None, manifest: Optional[Iterable] = None) -> Corpus:
    """Load world dumps in chronological order.

    ``seq`` follows file order, then entry order.  With ``manifest`` the
    files are ordered by their manifest position instead of argument order.
    ``category`` is the first directory under ``root`` (or the parent
    directory name when no root is given).
    """
    paths = [Path(p) for p in paths]
    if manifest is not None:
        rank = {Path(p).resolve(): i for i, p in enumerate(manifest)}
        missing = [str(p) for p in paths if p.resolve() not in rank]
        if missing:
            raise CorpusError(f"files not listed in manifest: {', '.join(missing)}")
        paths.sort(key=lambda p: rank[p.resolve()])
    formulas: list[NamedFormula] = []
    origin: dict[str, str] = {}
    for path in paths:
        category = _category_of(str(path), root)
        under = root is not None and _is_under(path, root)
        book = str(path.relative_to(root)) if under else str(path)
        for datum in _read_data(path):
            if not _head_is(datum, "EVENT") or len(datum.items) != 4 or datum.tail is not None:
                raise CorpusError(f"{path}: expected (EVENT kind name formula), got entry "
                                  f"#{len(formulas)}")
            _, kind_sym, name_sym, body = datum.items
            if not isinstance(kind_sym, Sym) or kind_sym.name not in KINDS:
                raise CorpusError(f"{path}: unknown EVENT kind {kind_sym!r}")
            if not isinstance(name_sym, Sym):
                raise CorpusError(f"{path}: event name must be a symbol")
            name = symbol_text(name_sym)
            if name in origin:
                raise CorpusError(f"duplicate name {name} in {origin[name]} and {path}")
            origin[name] = str(path)
            try:
                term = remove_lambdas(to_term(body))
            except MalformedTermError as exc:
                raise CorpusError(f"{path}: {name}: {exc}") from None
            formulas.append(NamedFormula(name, KINDS[kind_sym.name], term, len(formulas),
                                         book, category))
    return Corpus(formulas, [str(p) for p in paths])


def _is_under(path: Path, root) -> bool:
    try:
        path.resolve().relative_to(Path(root).resolve())
        return True
    except ValueError:
        return False


def load_manifest(manifest_path, root=None) -> Corpus:
    files = read_manifest(manifest_path)
    if root is None:
        root = Path(manifest_path).parent
    return load_world(files, root=root)


@dataclass
class DepGraph:
    """Proof dependencies restricted to valid, chronologically earlier
    supporters; every problem found while loading is kept in the report
    lists instead of being dropped silently."""

    deps: dict[str, list[str]] = field(default_factory=dict)
    dangling: list[tuple[str, str]] = field(default_factory=list)
    unknown: list[str] = field(default_factory=list)
    chronology: list[tuple[str, str]] = field(default_factory=list)

    def __contains__(self, name: str) -> bool:
        return name in self.deps

    def __getitem__(self, name: str) -> list[str]:
        return self.deps[name]

    def get(self, name: str, default=None):
        return self.deps.get(name, default)

    @functools.cached_property
    def incomplete(self) -> set[str]:
        """Theorems whose recorded supporters are not all usable."""
        bad = {t for t, _ in self.dangling}
        bad.update(t for t, _ in self.chronology)
        return bad

    def complete(self, name: str) -> bool:
        return name in self.deps and name not in self.incomplete

    def restrict(self, names) -> "DepGraph":
        """Graph over ``names`` only; supporters outside it are dropped."""
        names = set(names)
        return DepGraph({t: [s for s in sups if s in names]
                         for t, sups in self.deps.items() if t in names})

    def report(self) -> dict:
        return {
            "theorems": len(self.deps),
            "dangling": [list(x) for x in self.dangling],
            "unknown_theorems": list(self.unknown),
            "chronology_violations": [list(x) for x in self.chronology],
        }


def load_deps(path, corpus: Optional[Corpus] = None) -> DepGraph:
    """Read ``(DEPS name (supporter ...))`` entries.

    Without a corpus no validation is done.  With one, supporters missing
    from the corpus are reported as dangling, supporters that are not older
    than the theorem as chronology violations, and entries for unknown
    theorems are recorded and skipped.
    """
    graph = DepGraph()
    for datum in _read_data(path):
        if not _head_is(datum, "DEPS") or len(datum.items) != 3 or datum.tail is not None:
            raise CorpusError(f"{path}: expected (DEPS name (supporters...))")
        _, name_sym, sups = datum.items
        if not isinstance(name_sym, Sym):
            raise CorpusError(f"{path}: DEPS name must be a symbol")
        if isinstance(sups, Sym) and sups.name == "NIL":
            supporters: list = []
        elif isinstance(sups, SList) and sups.tail is None and all(
                isinstance(s, Sym) for s in sups.items):
            supporters = [symbol_text(s) for s in sups.items]
        else:
            raise CorpusError(
                f"{path}: supporters of {symbol_text(name_sym)} must be a symbol list")
        name = symbol_text(name_sym)
        if name in graph.deps or name in graph.unknown:
            raise CorpusError(f"{path}: duplicate DEPS entry for {name}")
        supporters = list(dict.fromkeys(supporters))
        if corpus is None:
            graph.deps[name] = supporters
            continue
        if name not in corpus:
            graph.unknown.append(name)
            continue
        seq = corpus[name].seq
        kept = []
        for s in supporters:
            if s not in corpus:
                graph.dangling.append((name, s))
            elif corpus[s].seq >= seq:
                graph.chronology.append((name, s))
            else:
                kept.append(s)
        graph.deps[name] = kept
    if graph.dangling or graph.chronology or graph.unknown:
        log.info("deps %s: %d dangling, %d chronology violations, %d unknown theorems",
                 path, len(graph.dangling), len(graph.chronology), len(graph.unknown))
    return graph


@dataclass
class CorpusStats:
    files: int = 0
    formulas: int = 0
    theorems: int = 0
    definitions: int = 0
    problems_per_category: dict = field(default_factory=dict)
    distinct_features: int = 0
    mean_features: Optional[float] = None
    mean_dependencies: Optional[float] = None
    quoted_dotted: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def corpus_stats(corpus: Corpus, deps: Optional[DepGraph] = None,
                 features: Optional[dict] = None) -> CorpusStats:
    """Aggregate counts.  ``features`` maps formula name to feature vector.

    Mean features per formula counts distinct features; mean dependencies
    is taken over theorems with a non-empty recorded dependency list.
    """
    stats = CorpusStats(files=len(corpus.files), formulas=len(corpus))
    stats.theorems = sum(f.kind == "theorem" for f in corpus)
    stats.definitions = sum(f.kind == "definition" for f in corpus)
    stats.quoted_dotted = sum(has_quoted_dotted(f.term) for f in corpus)
    if deps is not None:
        per_cat: dict[str, int] = {}
        for f in corpus:
            if f.kind == "theorem" and deps.complete(f.name):
                per_cat[f.category] = per_cat.get(f.category, 0) + 1
        stats.problems_per_category = dict(sorted(per_cat.items()))
        sizes = [len(deps[f.name]) for f in corpus if f.name in deps and deps[f.name]]
        stats.mean_dependencies = fmean(sizes) if sizes else None
    if features:
        vocab = set()
        for vec in features.values():
            vocab.update(vec)
        stats.distinct_features = len(vocab)
        stats.mean_features = fmean(len(v) for v in features.values())
    return stats


def write_index(corpus: Corpus, path) -> None:
    """One tab-separated line per formula: seq, name, kind, category, book."""
    lines = [f"{f.seq}\t{f.name}\t{f.kind}\t{f.category}\t{f.book}" for f in corpus]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")

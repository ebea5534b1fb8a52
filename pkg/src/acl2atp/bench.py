"""Running external provers and scoring their results.

Prover configuration is an INI file with one section per prover::

    [eprover]
    command = eprover --auto --cpu-limit={timeout} -s {problem}
    timeout = 10

``{problem}`` must occur exactly once; ``{timeout}`` is optional and
expands to the configured limit in whole seconds.
"""

from __future__ import annotations

import configparser
import logging
import math
import os
import re
import shlex
import shutil
import signal
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from statistics import fmean
from typing import Iterable, Optional, Sequence

from acl2atp.corpus import Corpus, DepGraph

log = logging.getLogger(__name__)

STATUSES = ("Theorem", "CounterSatisfiable", "Satisfiable", "Timeout", "GaveUp", "Error")
# SZS ontology -> reported status.
SZS_MAP = {
    "Theorem": "Theorem",
    "Unsatisfiable": "Theorem",
    "ContradictoryAxioms": "Theorem",
    "CounterSatisfiable": "CounterSatisfiable",
    "Satisfiable": "Satisfiable",
    "Timeout": "Timeout",
    "ResourceOut": "Timeout",
    "Error": "Error",
    "OSError": "Error",
    "InputError": "Error",
    "SyntaxError": "Error",
}
DEFAULT_STATUS_RE = r"SZS status\s+(\w+)"
GRACE_SECONDS = 2.0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProverConfig:
    id: str
    command: str
    timeout: float = 10.0
    status_pattern: str = DEFAULT_STATUS_RE

    def __post_init__(self):
        if not self.timeout > 0:
            raise ConfigError(f"{self.id}: timeout must be positive")
        if self.command.count("{problem}") != 1:
            raise ConfigError(f"{self.id}: command must contain exactly one {{problem}}")
        try:
            re.compile(self.status_pattern)
        except re.error as exc:
            raise ConfigError(f"{self.id}: bad status pattern: {exc}") from None

    def argv(self, problem) -> list[str]:
        words = shlex.split(self.command)
        limit = str(max(1, math.ceil(self.timeout)))
        return [w.replace("{problem}", str(problem)).replace("{timeout}", limit) for w in words]

    def with_timeout(self, timeout: float) -> "ProverConfig":
        return ProverConfig(self.id, self.command, timeout, self.status_pattern)


def load_provers(path) -> list[ProverConfig]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    out = []
    for section in parser.sections():
        sec = parser[section]
        if "command" not in sec:
            raise ConfigError(f"{path}: prover {section} has no command")
        try:
            timeout = sec.getfloat("timeout", 10.0)
        except ValueError:
            raise ConfigError(f"{path}: prover {section}: timeout is not a number") from None
        out.append(ProverConfig(section, sec["command"], timeout,
                                sec.get("status", DEFAULT_STATUS_RE)))
    if not out:
        raise ConfigError(f"{path}: no provers configured")
    return out


def check_binaries(configs: Iterable[ProverConfig]) -> None:
    for cfg in configs:
        exe = shlex.split(cfg.command)[0]
        if shutil.which(exe) is None:
            raise ConfigError(f"prover {cfg.id}: executable {exe!r} not found")


@dataclass(frozen=True)
class AtpResult:
    problem: str
    prover: str
    status: str
    seconds: float


def parse_status(output: str, pattern: str = DEFAULT_STATUS_RE) -> Optional[str]:
    """Status from the first SZS line, mapped onto :data:`STATUSES`."""
    m = re.search(pattern, output)
    if m is None:
        return None
    return SZS_MAP.get(m.group(1), "GaveUp")


def run_prover(cfg: ProverConfig, problem, name: Optional[str] = None,
               grace: float = GRACE_SECONDS) -> AtpResult:
    """Run one prover on one problem with a hard wall-clock limit."""
    name = name if name is not None else str(problem)
    start = time.monotonic()
    try:
        proc = subprocess.Popen(cfg.argv(problem), stdout=subprocess.PIPE,
                                stderr=subprocess.STDOUT, start_new_session=True)
    except OSError as exc:
        log.warning("%s on %s: %s", cfg.id, name, exc)
        return AtpResult(name, cfg.id, "Error", 0.0)
    try:
        out, _ = proc.communicate(timeout=cfg.timeout + grace)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        proc.communicate()
        return AtpResult(name, cfg.id, "Timeout", time.monotonic() - start)
    elapsed = time.monotonic() - start
    status = parse_status(out.decode("utf-8", errors="replace"), cfg.status_pattern)
    if status is None:
        status = "Error" if proc.returncode != 0 else "GaveUp"
    return AtpResult(name, cfg.id, status, elapsed)


def run_batch(configs: Sequence[ProverConfig], problems: Iterable[tuple[str, Path]],
              workers: int = 1) -> list[AtpResult]:
    """Every prover on every ``(name, path)`` problem, ``workers`` runs at a
    time.  Results come back sorted by problem, then prover order."""
    check_binaries(configs)
    jobs = [(cfg, path, name) for name, path in problems for cfg in configs]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda job: run_prover(*job), jobs))
    order = {cfg.id: i for i, cfg in enumerate(configs)}
    return sorted(results, key=lambda r: (r.problem, order[r.prover]))


def write_results(results: Iterable[AtpResult], path) -> None:
    lines = [f"{r.problem}\t{r.prover}\t{r.status}\t{r.seconds:.3f}" for r in results]
    Path(path).write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def read_results(path) -> list[AtpResult]:
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4 or parts[2] not in STATUSES:
            raise ValueError(f"{path}:{lineno}: expected problem, prover, status, seconds")
        out.append(AtpResult(parts[0], parts[1], parts[2], float(parts[3])))
    return out


# --------------------------------------------------------------------------
# Scoreboards


@dataclass
class ProverRow:
    prover: str
    proved: int
    disproved: int
    unique: int
    sotac: Optional[Fraction]


@dataclass
class Scoreboard:
    rows: list
    any_proved: int
    any_disproved: int
    total: int
    raw_total: int
    alarms: list = field(default_factory=list)

    def row(self, prover: str) -> ProverRow:
        return next(r for r in self.rows if r.prover == prover)


def _outcomes(results: Iterable[AtpResult]):
    proved: dict = {}
    disproved: dict = {}
    provers: dict = {}
    for r in results:
        provers.setdefault(r.prover)
        proved.setdefault(r.problem, set())
        disproved.setdefault(r.problem, set())
        if r.status == "Theorem":
            proved[r.problem].add(r.prover)
        elif r.status == "CounterSatisfiable":
            disproved[r.problem].add(r.prover)
    return proved, disproved, list(provers)


def scoreboard(results: Iterable[AtpResult], total: Optional[int] = None,
               raw_total: Optional[int] = None) -> Scoreboard:
    """Proved/disproved counts, unique solutions and SotAC per prover.

    SotAC of a prover is the mean, over the problems it proved, of one over
    the number of provers that proved the problem.  ``total`` defaults to
    the number of distinct problems in ``results``.
    """
    proved, disproved, provers = _outcomes(results)
    total = len(proved) if total is None else total
    raw_total = total if raw_total is None else raw_total
    rows = []
    for p in provers:
        mine = [pb for pb, who in proved.items() if p in who]
        unique = sum(1 for pb in mine if proved[pb] == {p})
        sotac = (sum((Fraction(1, len(proved[pb])) for pb in mine), Fraction(0)) / len(mine)
                 if mine else None)
        n_dis = sum(1 for who in disproved.values() if p in who)
        rows.append(ProverRow(p, len(mine), n_dis, unique, sotac))
    alarms = sorted(pb for pb in proved if proved[pb] and disproved[pb])
    for pb in alarms:
        log.warning("soundness alarm: %s proved by %s and disproved by %s", pb,
                    sorted(proved[pb]), sorted(disproved[pb]))
    return Scoreboard(rows,
                      sum(1 for who in proved.values() if who),
                      sum(1 for who in disproved.values() if who),
                      total, raw_total, alarms)


def category_of(problem: str) -> str:
    parts = Path(problem).parts
    return parts[0] if len(parts) > 1 else ""


@dataclass
class CategoryRow:
    category: str
    proved_pct: float
    disproved_pct: float
    size: int


def category_table(results: Iterable[AtpResult], min_size: int = 0) -> list[CategoryRow]:
    """Union-of-provers proved/disproved rates per top-level category,
    sorted by proved rate descending."""
    proved, disproved, _ = _outcomes(results)
    by_cat: dict = {}
    for pb in proved:
        by_cat.setdefault(category_of(pb), []).append(pb)
    rows = []
    for cat, pbs in by_cat.items():
        if len(pbs) <= min_size:
            continue
        n = len(pbs)
        rows.append(CategoryRow(cat, 100.0 * sum(bool(proved[p]) for p in pbs) / n,
                                100.0 * sum(bool(disproved[p]) for p in pbs) / n, n))
    return sorted(rows, key=lambda r: (-r.proved_pct, r.category))


def _pct(count: int, total: int) -> str:
    pct = 100.0 * count / total if total else 0.0
    return f"{count:,} ({pct:.1f})"


def format_scoreboard(board: Scoreboard) -> str:
    header = ("Prover", "Proved (%)", "Disproved (%)", "Unique", "SotAC")
    body = []
    for r in board.rows:
        sotac = f"{float(r.sotac):.2f}" if r.sotac is not None else "-"
        body.append((r.prover, _pct(r.proved, board.total), _pct(r.disproved, board.total),
                     str(r.unique), sotac))
    body.append(("any", _pct(board.any_proved, board.total),
                 _pct(board.any_disproved, board.total), "", ""))
    lines = [f"Problems: {board.total} effective, {board.raw_total} raw"]
    lines += _table([header] + body)
    if board.alarms:
        lines.append(f"SOUNDNESS ALARMS ({len(board.alarms)}): " + " ".join(board.alarms))
    return "\n".join(lines) + "\n"


def scoreboard_tsv(board: Scoreboard) -> str:
    lines = ["prover\tproved\tproved_pct\tdisproved\tdisproved_pct\tunique\tsotac"]

    def pct(c):
        return f"{100.0 * c / board.total:.2f}" if board.total else "0.00"

    for r in board.rows:
        sotac = f"{float(r.sotac):.4f}" if r.sotac is not None else ""
        lines.append(f"{r.prover}\t{r.proved}\t{pct(r.proved)}\t{r.disproved}\t"
                     f"{pct(r.disproved)}\t{r.unique}\t{sotac}")
    lines.append(f"any\t{board.any_proved}\t{pct(board.any_proved)}\t{board.any_disproved}\t"
                 f"{pct(board.any_disproved)}\t\t")
    return "\n".join(lines) + "\n"


def format_categories(rows: list[CategoryRow]) -> str:
    body = [("Book category", "Proved (%)", "Disproved (%)", "Size")]
    body += [(r.category, f"{r.proved_pct:.2f}", f"{r.disproved_pct:.2f}", str(r.size))
             for r in rows]
    return "\n".join(_table(body)) + "\n"


def _table(rows: list[tuple]) -> list[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]


# --------------------------------------------------------------------------
# Premise-selection metrics


def _top(prediction, n: int) -> list[str]:
    if hasattr(prediction, "top"):
        return prediction.top(n)
    return list(prediction)[:n]


def precision_count(prediction, true_deps: Iterable[str], n: int = 100) -> int:
    """Number of the first ``n`` predictions that are true dependencies."""
    return len(set(_top(prediction, n)) & set(true_deps))


def cover(prediction, true_deps: Iterable[str], n: int = 100) -> Fraction:
    """Fraction of the true dependencies found among the first ``n``."""
    true_deps = set(true_deps)
    if not true_deps:
        raise ValueError("cover is undefined for an empty dependency set")
    return Fraction(precision_count(prediction, true_deps, n), len(true_deps))


@dataclass
class MlMetrics:
    """Mean cover (fraction) and mean precision (count) per category."""

    per_category: dict
    overall_cover: Optional[float]
    overall_precision: Optional[float]
    overall_count: int
    n: int


def ml_metrics(predictions: dict, deps: DepGraph, corpus: Corpus, n: int = 100,
               per_category: bool = True) -> MlMetrics:
    """Average cover/precision over theorems with non-empty dependencies.

    With ``per_category`` the true dependencies of a theorem are limited to
    its own category, matching how per-category predictions are made.
    """
    samples: dict = {}
    for f in corpus:
        if f.kind != "theorem" or f.name not in deps or f.name not in predictions:
            continue
        true = deps[f.name]
        if per_category:
            true = [s for s in true if s in corpus and corpus[s].category == f.category]
        if not true:
            continue
        pred = predictions[f.name]
        samples.setdefault(f.category, []).append(
            (cover(pred, true, n), precision_count(pred, true, n)))
    per_cat = {}
    for cat in sorted(samples):
        vals = samples[cat]
        per_cat[cat] = (fmean(float(c) for c, _ in vals), fmean(p for _, p in vals), len(vals))
    flat = [v for vals in samples.values() for v in vals]
    return MlMetrics(per_cat,
                     fmean(float(c) for c, _ in flat) if flat else None,
                     fmean(p for _, p in flat) if flat else None,
                     len(flat), n)


def format_ml_metrics(m: MlMetrics, min_size: int = 0) -> str:
    body = [("Book", f"{m.n}-Cover (%)", f"{m.n}-Precision", "Size")]
    for cat, (c, p, size) in m.per_category.items():
        if size > min_size:
            body.append((cat, f"{100 * c:.0f}", f"{p:.2f}", str(size)))
    if m.overall_count:
        body.append(("all", f"{100 * m.overall_cover:.0f}", f"{m.overall_precision:.2f}",
                     str(m.overall_count)))
    return "\n".join(_table(body)) + "\n"


def ml_metrics_tsv(m: MlMetrics) -> str:
    lines = ["category\tcover\tprecision\tsize"]
    for cat, (c, p, size) in m.per_category.items():
        lines.append(f"{cat}\t{c:.6f}\t{p:.6f}\t{size}")
    if m.overall_count:
        lines.append(f"all\t{m.overall_cover:.6f}\t{m.overall_precision:.6f}\t{m.overall_count}")
    return "\n".join(lines) + "\n"

"""Command-line entry point: ``acl2atp <subcommand> [options]``.

Options may also come from an INI config file (``--config`` or the
``ACL2ATP_CONFIG`` environment variable) with a ``[run]`` section whose
keys are the long option names with ``_`` for ``-``; flags win.

Exit status: 0 on success, 1 on input errors, 2 on internal invariant
violations.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from acl2atp import bench, corpus as corpus_mod, forge, learn
from acl2atp.fof import FofSyntaxError, fof_text, parse_tptp
from acl2atp.sexpr import SexprError
from acl2atp.translate import SPECIAL_AXIOMS_TEXT, TranslationError, build_arity_table, translate

log = logging.getLogger("acl2atp")

CONFIG_ENV = "ACL2ATP_CONFIG"
RUN_MANIFEST = "run-manifest.json"
COMMANDS = ("translate", "gen-reprove", "gen-advice", "predict", "bench", "metrics", "stats")


class InvariantError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help=f"INI file with a [run] section (default: ${CONFIG_ENV})")
    p.add_argument("--manifest", help="world manifest, oldest file first")
    p.add_argument("--corpus-root", help="directory whose subdirectories are book categories")
    p.add_argument("--deps", help="dependency file")
    p.add_argument("--out", help="run directory for all outputs")
    p.add_argument("--category", action="append", help="restrict to a book category (repeatable)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="acl2atp", description="ACL2 to TPTP translation, premise "
                     "selection and prover benchmarking")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("translate", help="translate the corpus to FOF axiom files")
    _common(p)
    p = sub.add_parser("gen-reprove", help="problems with the recorded ACL2 dependencies")
    _common(p)
    for name, helptext in (("predict", "k-NN premise predictions for every theorem"),
                           ("gen-advice", "problems with the top-n predicted premises")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--k", type=int, help=f"neighbors (default {learn.DEFAULT_K})")
        p.add_argument("--n", type=int, help=f"premises kept (default {learn.DEFAULT_N})")
        p.add_argument("--global", dest="global_", action="store_true",
                       help="one chronology over all categories instead of per category")
        if name == "gen-advice":
            p.add_argument("--predictions", help="predictions file (default: OUT/predictions.txt)")
    p = sub.add_parser("bench", help="run provers and build the scoreboard")
    _common(p)
    p.add_argument("--provers", help="prover config file")
    p.add_argument("--timeout", type=float, help="override every prover's time limit")
    p.add_argument("--workers", type=int, help="concurrent prover runs (default 1)")
    p.add_argument("--set", dest="problem_set", choices=("reprove", "advice"), default=None,
                   help="problem set under OUT/problems (default reprove)")
    p.add_argument("--problems", help="problem directory (overrides --set)")
    p.add_argument("--from-log", help="score an existing results log instead of running")
    p.add_argument("--min-category-size", type=int)
    p = sub.add_parser("metrics", help="100-cover / 100-precision of the predictions")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--predictions")
    p.add_argument("--global", dest="global_", action="store_true")
    p.add_argument("--min-category-size", type=int)
    p = sub.add_parser("stats", help="corpus statistics")
    _common(p)
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    path = args.config or os.environ.get(CONFIG_ENV)
    if not path:
        return
    cfg = configparser.ConfigParser(interpolation=None)
    if not cfg.read(path, encoding="utf-8"):
        raise FileNotFoundError(f"config file {path} not found")
    if not cfg.has_section("run"):
        return
    base = Path(path).parent
    for key, value in cfg["run"].items():
        attr = key.replace("-", "_")
        if attr == "global":
            attr = "global_"
        if not hasattr(args, attr):
            continue
        current = getattr(args, attr)
        if current is not None and current is not False:
            continue
        if attr in ("k", "n", "workers", "min_category_size"):
            value = int(value)
        elif attr == "timeout":
            value = float(value)
        elif attr == "global_":
            value = cfg["run"].getboolean(key)
        elif attr == "category":
            value = value.split()
        elif attr in ("manifest", "corpus_root", "deps", "out", "provers", "predictions",
                      "problems", "from_log"):
            value = str(base / value)
        setattr(args, attr, value)


def _require(args, *names) -> None:
    missing = [n for n in names if not getattr(args, n, None)]
    if missing:
        raise ValueError("missing required option(s): " +
                         ", ".join("--" + n.replace("_", "-") for n in missing))


class Run:
    """Shared loading and output bookkeeping for one invocation."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out)
        self.produced: list[Path] = []
        self._corpus = None
        self._deps = None

    @property
    def corpus(self) -> corpus_mod.Corpus:
        if self._corpus is None:
            _require(self.args, "manifest")
            root = self.args.corpus_root or Path(self.args.manifest).parent
            self._corpus = corpus_mod.load_manifest(self.args.manifest, root)
        return self._corpus

    @property
    def deps(self) -> corpus_mod.DepGraph:
        if self._deps is None:
            _require(self.args, "deps")
            self._deps = corpus_mod.load_deps(self.args.deps, self.corpus)
        return self._deps

    @property
    def categories(self) -> Optional[set]:
        return set(self.args.category) if self.args.category else None

    def table(self):
        table = build_arity_table((f.term for f in self.corpus), (f.name for f in self.corpus))
        bad = {a: s for a, s in table.atom_arities().items() if len(s) != 1}
        if bad:
            raise InvariantError(f"atoms with several arities: {bad}")
        return table

    def write(self, rel: str, text: str) -> Path:
        path = self.out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.produced.append(path)
        return path

    def record(self, paths) -> None:
        self.produced.extend(Path(p) for p in paths)

    def finish(self, summary: dict) -> None:
        manifest_path = self.out / RUN_MANIFEST
        known = set()
        if manifest_path.exists():
            known.update(json.loads(manifest_path.read_text(encoding="utf-8"))["artifacts"])
        known.update(p.relative_to(self.out).as_posix() for p in self.produced)
        self.out.mkdir(parents=True, exist_ok=True)
        manifest_path.write_text(json.dumps({"artifacts": sorted(known)}, indent=1) + "\n",
                                 encoding="utf-8")
        print(json.dumps(summary, sort_keys=True))


def cmd_translate(run: Run) -> dict:
    corpus, table = run.corpus, run.table()
    run.write("corpus/00axioms.ax", SPECIAL_AXIOMS_TEXT)
    by_cat: dict = {}
    for f in corpus:
        clause = fof_text(translate(f.name, "axiom", f.term, table))
        by_cat.setdefault(f.category or "_", []).append(clause)
    for cat, lines in sorted(by_cat.items()):
        run.write(f"corpus/{cat}.ax", "".join(l + "\n" for l in lines))
    index = run.out / "corpus" / "index.tsv"
    corpus_mod.write_index(corpus, index)
    run.record([index])
    print(f"{len(corpus)} formulas translated", file=sys.stderr)
    return {"formulas": len(corpus), "categories": len(by_cat)}


def _check_problems(report: forge.BatchReport) -> None:
    for pf in report.written:
        parsed = parse_tptp(pf.render()).formulas
        if sum(f.role == "conjecture" for f in parsed) != 1:
            raise InvariantError(f"{pf.relpath}: expected exactly one conjecture")


def cmd_gen_reprove(run: Run) -> dict:
    out_dir = run.out / "problems" / "reprove"
    report = forge.generate_reprove(run.corpus, run.deps, run.table(), out_dir, run.categories)
    _check_problems(report)
    run.record(out_dir / p.relpath for p in report.written)
    run.record([out_dir / "index.tsv", out_dir / "skipped.tsv"])
    return report.summary()


def _default(value, fallback):
    return fallback if value is None else value


def _knn(args) -> learn.KnnConfig:
    return learn.KnnConfig(_default(args.k, learn.DEFAULT_K), _default(args.n, learn.DEFAULT_N))


def _predictions(run: Run, cfg: learn.KnnConfig) -> dict:
    preds = learn.predict_all(run.corpus, run.deps, cfg, per_category=not run.args.global_)
    if run.categories:
        preds = {k: v for k, v in preds.items() if run.corpus[k].category in run.categories}
    return preds


def cmd_predict(run: Run) -> dict:
    cfg = _knn(run.args)
    preds = _predictions(run, cfg)
    path = run.out / "predictions.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    learn.write_predictions(preds.values(), path)
    run.record([path])
    return {"predictions": len(preds), "k": cfg.k, "n": cfg.n}


def cmd_gen_advice(run: Run) -> dict:
    cfg = _knn(run.args)
    pred_path = Path(run.args.predictions) if run.args.predictions else run.out / "predictions.txt"
    if pred_path.exists():
        preds = learn.read_predictions(pred_path)
    else:
        preds = _predictions(run, cfg)
    out_dir = run.out / "problems" / "advice"
    report = forge.generate_advice(run.corpus, preds, cfg.n, run.table(), out_dir, run.categories)
    _check_problems(report)
    run.record(out_dir / p.relpath for p in report.written)
    run.record([out_dir / "index.tsv", out_dir / "skipped.tsv"])
    return {**report.summary(), "n": cfg.n}


def _problem_list(directory: Path) -> list[tuple[str, Path]]:
    index = directory / "index.tsv"
    if index.exists():
        rels = [l.split("\t")[0] for l in index.read_text(encoding="utf-8").splitlines() if l]
    else:
        rels = sorted(p.relative_to(directory).as_posix() for p in directory.rglob("*.p"))
    return [(rel, directory / rel) for rel in rels]


def cmd_bench(run: Run) -> dict:
    args = run.args
    set_name = args.problem_set or "reprove"
    raw_total = None
    if args.from_log:
        results = bench.read_results(args.from_log)
    else:
        _require(args, "provers")
        provers = bench.load_provers(args.provers)
        if args.timeout is not None:
            provers = [p.with_timeout(args.timeout) for p in provers]
        directory = Path(args.problems) if args.problems else run.out / "problems" / set_name
        problems = _problem_list(directory)
        skipped = directory / "skipped.tsv"
        if skipped.exists():
            raw_total = len(problems) + sum(1 for l in skipped.read_text().splitlines() if l)
        workers = _default(args.workers, 1)
        if workers < 1:
            raise ValueError("--workers must be at least 1")
        results = bench.run_batch(provers, problems, workers)
        log_path = run.out / "results" / f"{set_name}.log"
        log_path.parent.mkdir(parents=True, exist_ok=True)
        bench.write_results(results, log_path)
        run.record([log_path])
    board = bench.scoreboard(results, raw_total=raw_total)
    run.write(f"results/{set_name}.scoreboard.txt", bench.format_scoreboard(board))
    run.write(f"results/{set_name}.scoreboard.tsv", bench.scoreboard_tsv(board))
    categories = bench.category_table(results, _default(args.min_category_size, 0))
    run.write(f"results/{set_name}.categories.txt", bench.format_categories(categories))
    sys.stderr.write(bench.format_scoreboard(board))
    return {"problems": board.total, "proved": board.any_proved,
            "disproved": board.any_disproved, "alarms": len(board.alarms)}


def cmd_metrics(run: Run) -> dict:
    n = _default(run.args.n, learn.DEFAULT_N)
    if n < 1:
        raise ValueError("--n must be at least 1")
    pred_path = Path(run.args.predictions) if run.args.predictions else run.out / "predictions.txt"
    preds = learn.read_predictions(pred_path)
    m = bench.ml_metrics(preds, run.deps, run.corpus, n, per_category=not run.args.global_)
    run.write("metrics.txt", bench.format_ml_metrics(m, _default(run.args.min_category_size, 0)))
    run.write("metrics.tsv", bench.ml_metrics_tsv(m))
    return {"conjectures": m.overall_count, "cover": m.overall_cover,
            "precision": m.overall_precision, "n": n}


def cmd_stats(run: Run) -> dict:
    corpus = run.corpus
    deps = run.deps if run.args.deps else None
    stats = corpus_mod.corpus_stats(corpus, deps, learn.corpus_features(corpus))
    data = stats.as_dict()
    if deps is not None:
        data["deps_report"] = deps.report()
    run.write("stats.json", json.dumps(data, indent=1, sort_keys=True) + "\n")
    return {k: v for k, v in data.items() if not isinstance(v, (dict, list))}


HANDLERS = {
    "translate": cmd_translate,
    "gen-reprove": cmd_gen_reprove,
    "gen-advice": cmd_gen_advice,
    "predict": cmd_predict,
    "bench": cmd_bench,
    "metrics": cmd_metrics,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _apply_config(args)
        _require(args, "out")
        run = Run(args)
        summary = HANDLERS[args.command](run)
        run.finish({"command": args.command, **summary})
    except (InvariantError, TranslationError, AssertionError) as exc:
        log.error("internal invariant violated: %s", exc)
        return 2
    except (corpus_mod.CorpusError, SexprError, bench.ConfigError, forge.ProblemError,
            FofSyntaxError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

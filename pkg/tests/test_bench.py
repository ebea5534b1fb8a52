import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from acl2atp.bench import (
    AtpResult,
    ConfigError,
    ProverConfig,
    category_table,
    cover,
    format_categories,
    format_ml_metrics,
    format_scoreboard,
    load_provers,
    ml_metrics,
    ml_metrics_tsv,
    parse_status,
    precision_count,
    read_results,
    run_batch,
    run_prover,
    scoreboard,
    scoreboard_tsv,
    write_results,
)
from acl2atp.corpus import Corpus, DepGraph, NamedFormula
from acl2atp.learn import Prediction
from acl2atp.terms import Var
from helpers import write_fake_prover


def R(problem, prover, status, seconds=0.1):
    return AtpResult(problem, prover, status, seconds)


# --------------------------------------------------------------------------
# Status parsing and prover processes


@pytest.mark.parametrize("text,status", [
    ("# SZS status Theorem for p", "Theorem"),
    ("% SZS status CounterSatisfiable for p\n% SZS status Theorem", "CounterSatisfiable"),
    ("SZS status Unsatisfiable", "Theorem"),
    ("SZS status ResourceOut", "Timeout"),
    ("SZS status GaveUp", "GaveUp"),
    ("SZS status Unknown", "GaveUp"),
    ("SZS status Satisfiable", "Satisfiable"),
    ("nothing here", None),
])
def test_parse_status(text, status):
    assert parse_status(text) == status


def _fake(tmp_path, name, body, timeout=5.0):
    script = write_fake_prover(tmp_path / name, body)
    return ProverConfig(name, f"{script} {{problem}} --limit={{timeout}}", timeout)


def test_theorem_and_countersat(tmp_path):
    problem = tmp_path / "p.p"
    problem.write_text("fof(a,conjecture,p).\n")
    thm = _fake(tmp_path, "thm", "print('% SZS status Theorem for', sys.argv[1])")
    csa = _fake(tmp_path, "csa", "print('% SZS status CounterSatisfiable')")
    r = run_prover(thm, problem, name="cat/p.p")
    assert (r.problem, r.prover, r.status) == ("cat/p.p", "thm", "Theorem")
    assert run_prover(csa, problem).status == "CounterSatisfiable"


def test_arguments_are_substituted(tmp_path):
    echo = _fake(tmp_path, "echo",
                 "print('SZS status Theorem' if sys.argv[1:] == ['P', '--limit=3'] "
                 "else 'SZS status Error')", timeout=2.5)
    assert run_prover(echo, "P").status == "Theorem"


def test_timeout_is_enforced(tmp_path):
    slow = _fake(tmp_path, "slow", "time.sleep(30)", timeout=0.5)
    r = run_prover(slow, tmp_path / "p.p", grace=0.3)
    assert r.status == "Timeout"
    assert 0.5 <= r.seconds < 3.0


def test_nonzero_exit_without_status_is_error(tmp_path):
    crash = _fake(tmp_path, "crash", "sys.exit(3)")
    quiet = _fake(tmp_path, "quiet", "pass")
    assert run_prover(crash, "x").status == "Error"
    assert run_prover(quiet, "x").status == "GaveUp"


def test_missing_binary_fails_before_batch(tmp_path):
    cfg = ProverConfig("ghost", "/nonexistent/prover {problem}")
    with pytest.raises(ConfigError):
        run_batch([cfg], [("p", tmp_path / "p.p")])


def test_batch_order_and_reproducibility(tmp_path):
    a = _fake(tmp_path, "a", "print('SZS status Theorem' if 'x' in sys.argv[1] else "
                             "'SZS status GaveUp')")
    b = _fake(tmp_path, "b", "print('SZS status Timeout')")
    problems = [(f"c/{n}.p", tmp_path / n) for n in ("y", "x", "z")]
    first = run_batch([a, b], problems, workers=4)
    second = run_batch([a, b], problems, workers=1)
    assert [(r.problem, r.prover, r.status) for r in first] == [
        ("c/x.p", "a", "Theorem"), ("c/x.p", "b", "Timeout"),
        ("c/y.p", "a", "GaveUp"), ("c/y.p", "b", "Timeout"),
        ("c/z.p", "a", "GaveUp"), ("c/z.p", "b", "Timeout"),
    ]
    assert [r.status for r in first] == [r.status for r in second]


def test_config_validation():
    with pytest.raises(ConfigError):
        ProverConfig("x", "prover", 10)
    with pytest.raises(ConfigError):
        ProverConfig("x", "prover {problem} {problem}", 10)
    with pytest.raises(ConfigError):
        ProverConfig("x", "prover {problem}", 0)
    with pytest.raises(ConfigError):
        ProverConfig("x", "prover {problem}", 1, status_pattern="(")


def test_load_provers(tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("[e]\ncommand = eprover --cpu-limit={timeout} {problem}\ntimeout = 7\n"
                   "[v]\ncommand = vampire {problem}\n")
    e, v = load_provers(cfg)
    assert (e.id, e.timeout, v.timeout) == ("e", 7.0, 10.0)
    assert e.argv("a b.p") == ["eprover", "--cpu-limit=7", "a b.p"]
    cfg.write_text("[r]\ncommand = r {problem}\nstatus = RESULT: (\\w+)\n")
    (r,) = load_provers(cfg)
    assert parse_status("RESULT: Theorem", r.status_pattern) == "Theorem"
    cfg.write_text("[e]\ntimeout = 1\n")
    with pytest.raises(ConfigError):
        load_provers(cfg)
    cfg.write_text("")
    with pytest.raises(ConfigError):
        load_provers(cfg)


def test_results_log_round_trip(tmp_path):
    results = [R("c/p1.p", "A", "Theorem", 1.25), R("c/p2.p", "B", "Timeout", 10.0)]
    write_results(results, tmp_path / "r.log")
    assert (tmp_path / "r.log").read_text() == (
        "c/p1.p\tA\tTheorem\t1.250\nc/p2.p\tB\tTimeout\t10.000\n")
    assert read_results(tmp_path / "r.log") == results
    (tmp_path / "bad.log").write_text("p\tA\tProved\t1\n")
    with pytest.raises(ValueError):
        read_results(tmp_path / "bad.log")


# --------------------------------------------------------------------------
# Scoreboard


def test_two_prover_example():
    results = [R("p1", "A", "Theorem"), R("p1", "B", "GaveUp"),
               R("p2", "A", "Theorem"), R("p2", "B", "Theorem"),
               R("p3", "A", "Timeout"), R("p3", "B", "CounterSatisfiable")]
    board = scoreboard(results)
    a, b = board.row("A"), board.row("B")
    assert (a.sotac, b.sotac) == (Fraction(3, 4), Fraction(1, 2))
    assert (a.unique, b.unique) == (1, 0)
    assert (a.proved, b.proved, b.disproved) == (2, 1, 1)
    assert (board.any_proved, board.any_disproved, board.total) == (2, 1, 3)
    assert board.alarms == []
    text = format_scoreboard(board)
    assert text.splitlines()[1].split() == ["Prover", "Proved", "(%)", "Disproved", "(%)",
                                            "Unique", "SotAC"]
    assert text.splitlines()[-1].split() == ["any", "2", "(66.7)", "1", "(33.3)"]
    assert "A\t2\t66.67\t0\t0.00\t1\t0.7500" in scoreboard_tsv(board)


def test_single_winner():
    results = [R(f"p{i}", "A", "Theorem") for i in range(4)]
    results += [R(f"p{i}", p, "GaveUp") for i in range(4) for p in ("B", "C")]
    board = scoreboard(results)
    assert board.row("A").sotac == 1 and board.row("A").unique == 4
    assert board.row("B").sotac is None and board.row("B").proved == 0


def test_soundness_alarm():
    board = scoreboard([R("p", "A", "Theorem"), R("p", "B", "CounterSatisfiable")])
    assert board.alarms == ["p"]
    assert "SOUNDNESS ALARMS" in format_scoreboard(board)


@given(st.integers(0, 10**6))
def test_scoreboard_invariants(seed):
    rng = random.Random(seed)
    statuses = ["Theorem", "CounterSatisfiable", "GaveUp", "Timeout"]
    results = [R(f"p{i}", p, rng.choice(statuses)) for i in range(rng.randint(1, 12))
               for p in ("A", "B", "C")]
    board = scoreboard(results)
    assert sum(r.unique for r in board.rows) <= board.any_proved
    for r in board.rows:
        assert r.unique <= r.proved <= board.any_proved
        if r.sotac is not None:
            assert Fraction(1, 3) <= r.sotac <= 1


def test_effective_and_raw_totals():
    board = scoreboard([R("p", "A", "Theorem")], total=4, raw_total=5)
    assert format_scoreboard(board).startswith("Problems: 4 effective, 5 raw")
    assert "1 (25.0)" in format_scoreboard(board)


def test_category_table():
    results = [R("lists/a.p", "A", "Theorem"), R("lists/b.p", "A", "GaveUp"),
               R("arith/c.p", "A", "Theorem"), R("arith/d.p", "A", "CounterSatisfiable")]
    rows = category_table(results)
    assert [(r.category, r.proved_pct, r.disproved_pct, r.size) for r in rows] == [
        ("arith", 50.0, 50.0, 2), ("lists", 50.0, 0.0, 2)]
    assert category_table(results, min_size=2) == []
    assert "Book category" in format_categories(rows)


# --------------------------------------------------------------------------
# ML metrics


def test_cover_and_precision_examples():
    assert cover(["a", "b", "x"], {"a", "b"}) == 1
    assert cover(["x", "y"], {"a"}) == 0
    assert cover(["a", "x", "c"], {"a", "b", "c"}) == Fraction(2, 3)
    assert precision_count(list("abcde"), set("edcba")) == 5
    assert precision_count([], {"a"}) == 0
    assert cover(Prediction("g", [("a", 2.0), ("b", 1.0)]), {"b"}, n=1) == 0
    with pytest.raises(ValueError):
        cover(["a"], set())


@given(st.lists(st.sampled_from("abcdefghij"), unique=True),
       st.sets(st.sampled_from("abcdefghij"), min_size=1), st.integers(1, 12))
def test_metric_identities(pred, deps, n):
    c, p = cover(pred, deps, n), precision_count(pred, deps, n)
    assert p == c * len(deps)
    assert 0 <= c <= 1 and 0 <= p <= n
    if deps <= set(pred[:n]):
        assert c == 1


def _metric_corpus():
    names = [("A", "x"), ("B", "x"), ("C", "x"), ("D", "y"), ("E", "y"), ("F", "y")]
    formulas = [NamedFormula(n, "theorem", Var("X"), i, f"{c}/b.world", c)
                for i, (n, c) in enumerate(names)]
    return Corpus(formulas, [])


def test_ml_metrics_by_hand():
    corpus = _metric_corpus()
    deps = DepGraph({"B": ["A"], "C": ["A", "B"], "E": ["D", "A"], "F": [], "D": []})
    preds = {n: Prediction(n, [(p, 1.0) for p in ps])
             for n, ps in {"B": ["A"], "C": ["B", "X"], "E": ["A"], "F": ["E"]}.items()}
    m = ml_metrics(preds, deps, corpus, n=100)
    # x: B cover 1 prec 1; C cover 1/2 prec 1.  y: E (true deps in y: D) cover 0 prec 0.
    assert m.per_category == {"x": (0.75, 1.0, 2), "y": (0.0, 0.0, 1)}
    assert m.overall_cover == pytest.approx(0.5) and m.overall_precision == pytest.approx(2 / 3)
    glob = ml_metrics(preds, deps, corpus, n=100, per_category=False)
    # Without the category filter E's true deps are {D, A}: cover 1/2, precision 1.
    assert glob.per_category["y"] == (0.5, 1.0, 1)
    assert "all" in format_ml_metrics(m) and ml_metrics_tsv(m).startswith("category\t")

import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE: dict = {}


@pytest.fixture
def criterion(request):
    """Time a block against its runtime limit and record a PASS/FAIL line."""

    @contextmanager
    def run(number: int, title: str, limit: float):
        ACCEPTANCE[number] = f"FAIL  C{number:<2} {title}"
        start = time.perf_counter()
        yield
        elapsed = time.perf_counter() - start
        verdict = "PASS" if elapsed < limit else "FAIL"
        ACCEPTANCE[number] = f"{verdict}  C{number:<2} {title} ({elapsed:.2f}s, limit {limit:g}s)"
        assert elapsed < limit, f"criterion {number} took {elapsed:.2f}s (limit {limit}s)"

    return run


def record_skip(number: int, title: str, reason: str) -> None:
    ACCEPTANCE[number] = f"SKIP  C{number:<2} {title} ({reason})"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])

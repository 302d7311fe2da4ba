import csv
from pathlib import Path

import pytest

from fondplan import BENCHMARK_DIR, binary_task

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def report(number: int, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def manifest_rows(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["domain"] = str(path.parent / r["domain"])
        r["problem"] = str(path.parent / r["problem"])
    return rows


@pytest.fixture(scope="session")
def suite_rows():
    return manifest_rows(BENCHMARK_DIR / "manifest.csv")


@pytest.fixture(scope="session")
def unsolvable_rows():
    return manifest_rows(BENCHMARK_DIR / "unsolvable" / "manifest.csv")


@pytest.fixture
def retry_task():
    """v0 = at-goal, v1 = broken.  ``try`` may fail harmlessly and be retried."""
    return binary_task(2, [0, 0], {0: 1}, [("try", {1: 0}, [{0: 1}, {}])])


@pytest.fixture
def trap_task():
    """The only action may break the agent, after which nothing works."""
    return binary_task(2, [0, 0], {0: 1}, [("risk", {1: 0}, [{0: 1}, {1: 1}])])

import numpy as np
import pytest

from avekit.linalg import SparseMatrix
from avekit.problems import ProblemSpec, make_problem

# (criterion, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {crit}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def m2():
    """The m=2, q=0, p=0 instance: a 4x4 matrix with b = (-4, 3, -18, 13)."""
    return make_problem(ProblemSpec(2, 0.0, 0.0))


@pytest.fixture
def A_skew2():
    return SparseMatrix.from_dense([[2.0, 1.0], [-1.0, 2.0]])


@pytest.fixture
def record():
    """Return ``record(crit, passed, detail)``; the line is printed in the summary."""
    def _record(crit, passed, detail):
        ACCEPTANCE_LINES.append((crit, bool(passed), detail))
        return passed
    return _record

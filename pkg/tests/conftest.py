import warnings

import numpy as np
import pytest

from csfeas import DenseMatrix, Problem, Signal


def make_problem(H, y, truth=None, sigma=0.0, **meta):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Problem(DenseMatrix(np.asarray(H, dtype=float)), np.asarray(y, dtype=float), truth, sigma, meta=meta)


def random_consistent(rng, m, n, s=None):
    """Gaussian system with a known (optionally sparse) solution."""
    H = rng.standard_normal((m, n))
    x = rng.standard_normal(n)
    if s is not None:
        x[rng.permutation(n)[s:]] = 0.0
    return make_problem(H, H @ x, Signal(x)), x


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance reporting ---------------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """``criterion(number, ok, detail)`` records one acceptance line, then
    asserts ``ok`` so the test fails with the same message."""

    def record(number, ok, detail):
        ACCEPTANCE_LINES.append((number, bool(ok), detail))
        assert ok, f"criterion {number}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

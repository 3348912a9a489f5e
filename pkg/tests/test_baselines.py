import itertools

import numpy as np
import pytest

from csfeas import Signal, UsageError
from csfeas.baselines import OmpConfig, omp, omp_path

from conftest import make_problem


def best_subset(H, y, k):
    """Exhaustive search over all size-k supports."""
    best, best_r = None, np.inf
    for G in itertools.combinations(range(H.shape[1]), k):
        A = H[:, G]
        beta = np.linalg.lstsq(A, y, rcond=None)[0]
        r = np.linalg.norm(y - A @ beta)
        if r < best_r:
            best, best_r = G, r
    return set(best)


def test_identity_atom():
    P = make_problem(np.eye(3), [0, 7, 0])
    np.testing.assert_allclose(omp(P, OmpConfig(1)), [0, 7, 0])


def test_duplicate_columns_tie():
    H = np.array([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.5], [1.0, 0.0, 1.0, 0.0]])
    P = make_problem(H, [2.0, 0.0, 2.0])
    res = omp_path(P, OmpConfig(1))
    assert res.support == [0]


def test_duplicate_column_skipped_after_selection():
    H = np.array([[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    P = make_problem(H, [2.0, 1.0, 0.5])
    res = omp_path(P, OmpConfig(3))
    assert res.support == [0, 2, 3]
    np.testing.assert_allclose(res.estimate, [2, 0, 1, 0.5])


def test_exact_recovery_matches_brute_force():
    rng = np.random.default_rng(3)
    H = rng.standard_normal((16, 32))
    x = np.zeros(32)
    x[[4, 17, 29]] = [1.5, -2.0, 0.8]
    P = make_problem(H, H @ x, Signal(x))
    xh = omp(P, OmpConfig(3))
    np.testing.assert_allclose(xh, x, atol=1e-6)
    assert set(np.flatnonzero(xh)) == best_subset(H, P.y, 3)


def test_residual_tolerance_stops_early():
    P = make_problem(np.eye(3), [0, 7, 0])
    res = omp_path(P, OmpConfig(3, residual_tolerance=1e-9))
    assert res.support == [1]
    assert res.residual_norms[-1] == pytest.approx(0.0)


def test_config_validation():
    with pytest.raises(UsageError):
        OmpConfig(-1)
    with pytest.raises(UsageError):
        omp(make_problem(np.eye(3), [1, 2, 3]), OmpConfig(4))


def test_residuals_non_increasing():
    rng = np.random.default_rng(8)
    P = make_problem(rng.standard_normal((20, 40)), rng.standard_normal(20))
    res = omp_path(P, OmpConfig(10))
    assert all(b <= a + 1e-12 for a, b in zip(res.residual_norms, res.residual_norms[1:]))

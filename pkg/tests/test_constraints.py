import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from csfeas import (
    DegenerateConstraintError,
    HalfspaceConstraint,
    HyperplaneConstraint,
    L1BallConstraint,
    hyperplane_step,
    l1_step,
    l1_subgradient,
    sign_convention,
)
from csfeas.constraints import subgradient_step

finite = st.floats(-1e3, 1e3, allow_nan=False)


def vectors(n=None, min_n=1, max_n=20):
    shape = n if n is not None else st.integers(min_n, max_n)
    return hnp.arrays(np.float64, shape, elements=finite)


def test_sign_convention():
    assert sign_convention(0.0) == 1.0
    assert sign_convention(-3.2) == -1.0
    assert sign_convention(1e-300) == 1.0


def test_l1_subgradient_examples():
    t = l1_subgradient([0.0, 0.0, 0.0])
    np.testing.assert_array_equal(t, [1, 1, 1])
    assert t @ t == 3
    t = l1_subgradient([2.0, -1.0])
    np.testing.assert_array_equal(t, [1, -1])
    assert t @ t == 2
    z0, z = np.array([2.0, -1.0]), np.zeros(2)
    lhs = np.abs(z).sum() - np.abs(z0).sum()
    assert lhs == -3.0 == l1_subgradient(z0) @ (z - z0)


def test_hyperplane_step_examples():
    c = HyperplaneConstraint([1.0, 0.0], 1.0)
    np.testing.assert_allclose(hyperplane_step(c, [0, 0], 1.0), [1, 0])
    np.testing.assert_allclose(hyperplane_step(c, [0, 0], 1.8), [1.8, 0])
    c = HyperplaneConstraint([3.0, 4.0], 0.0)
    np.testing.assert_allclose(hyperplane_step(c, [3, 4], 1.0), [0, 0], atol=1e-15)


def test_l1_step_examples():
    np.testing.assert_array_equal(l1_step(L1BallConstraint(1.0, 2), [0.2, 0.1], 1.3), [0.2, 0.1])
    np.testing.assert_allclose(l1_step(L1BallConstraint(1.0, 2), [2.0, 0.0], 1.0), [1.5, -0.5])
    np.testing.assert_array_equal(l1_step(L1BallConstraint(2.0, 2), [1.0, 1.0], 1.0), [1, 1])


def test_zero_row_is_degenerate():
    with pytest.raises(DegenerateConstraintError):
        HyperplaneConstraint([0.0, 0.0], 1.0)


def test_halfspace_inactive_when_satisfied():
    c = HalfspaceConstraint([1.0, 0.0], 0.0)
    z = np.array([-1.0, 5.0])
    np.testing.assert_array_equal(subgradient_step(c, z, 1.0), z)
    np.testing.assert_allclose(subgradient_step(c, [2.0, 5.0], 1.0), [0, 5])


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_l1_subgradient_inequality(data):
    n = data.draw(st.integers(1, 30))
    z = data.draw(vectors(n))
    z0 = data.draw(vectors(n))
    t = l1_subgradient(z0)
    slack = np.abs(z).sum() - np.abs(z0).sum() - t @ (z - z0)
    assert slack >= -1e-9 * max(1.0, np.abs(z).sum() + np.abs(z0).sum())


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_reported_norm_matches(data):
    n = data.draw(st.integers(1, 20))
    z = data.draw(vectors(n))
    c = L1BallConstraint(1.0, n)
    t = c.subgrad(z)
    assert c.subgrad_norm_sq(z) == t @ t


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_hyperplane_alpha1_idempotent(data):
    n = data.draw(st.integers(1, 15))
    h = data.draw(vectors(n).filter(lambda v: v @ v > 1e-6))
    y = data.draw(finite)
    z = data.draw(vectors(n))
    c = HyperplaneConstraint(h, y)
    once = hyperplane_step(c, z, 1.0)
    twice = hyperplane_step(c, once, 1.0)
    scale = 1.0 + np.abs(once).max()
    np.testing.assert_allclose(twice, once, atol=1e-12 * scale * max(1.0, np.abs(h).max() ** 2 / (h @ h)))


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_hyperplane_fejer(data):
    n = data.draw(st.integers(2, 15))
    h = data.draw(vectors(n).filter(lambda v: v @ v > 1e-3))
    q = data.draw(vectors(n))
    z = data.draw(vectors(n))
    alpha = data.draw(st.floats(1e-3, 2.0 - 1e-3))
    c = HyperplaneConstraint(h, float(h @ q))
    # q is on the hyperplane up to rounding in the target
    z1 = hyperplane_step(c, z, alpha)
    d0, d1 = np.linalg.norm(z - q), np.linalg.norm(z1 - q)
    assert d1 <= d0 + 1e-9 * (1.0 + d0 + np.linalg.norm(q))


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_l1_step_leakage_bound(data):
    n = data.draw(st.integers(1, 20))
    z = data.draw(vectors(n))
    if data.draw(st.booleans()):
        z[data.draw(st.integers(0, n - 1))] = 0.0
    eps = data.draw(st.floats(1e-3, 100.0))
    lam = data.draw(st.floats(1e-3, 2.0 - 1e-3))
    z1 = l1_step(L1BallConstraint(eps, n), z, lam)
    l1, l1n = np.abs(z).sum(), np.abs(z1).sum()
    if l1 <= eps:
        np.testing.assert_array_equal(z1, z)
        return
    delta = lam * (l1 - eps) / n
    zeros = int(np.sum(z == 0))
    tol = 1e-12 * (l1 + n * delta)
    # each zero coordinate leaks exactly delta; nonzero ones shrink by delta
    assert l1n == pytest.approx(np.abs(np.abs(z[z != 0]) - delta).sum() + zeros * delta, abs=tol)
    if np.all(np.abs(z[z != 0]) >= delta):
        # no coordinate crosses zero
        assert l1n <= l1 + (2 * zeros - n) * delta + tol
        if zeros == 0:
            assert l1n < l1

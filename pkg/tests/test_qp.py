import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from hvdc_spc._qp import QPError, lsq_ineq


def test_exact_plane_recovered():
    rng = np.random.default_rng(3)
    pts = rng.uniform(1.0, 50.0, size=(200, 2))
    true = np.array([0.31, -0.07, 2.5])
    X = np.column_stack([pts, np.ones(len(pts))])
    y = X @ true
    # constraints that the true plane satisfies with slack
    G = np.column_stack([rng.uniform(1, 50, (30, 2)), np.ones(30)])
    h = G @ true - 1.0
    a0 = np.array([0.0, 0.0, 1e3])
    a, _ = lsq_ineq(X, y, G, h, a0)
    np.testing.assert_allclose(a, true, rtol=0, atol=1e-9)


def test_unconstrained_matches_lstsq():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(50, 3))
    y = rng.normal(size=50)
    a, W = lsq_ineq(X, y, np.empty((0, 3)), np.empty(0), np.zeros(3))
    np.testing.assert_allclose(a, np.linalg.lstsq(X, y, rcond=None)[0], atol=1e-10)
    assert W == []


def test_infeasible_start_rejected():
    with pytest.raises(QPError):
        lsq_ineq(np.eye(2), np.ones(2), np.array([[1.0, 0.0]]), np.array([5.0]), np.zeros(2))


def test_deterministic_working_set():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(40, 3))
    y = rng.normal(size=40)
    G = np.vstack([np.eye(3), np.eye(3)])  # duplicated rows force ties
    h = np.full(6, 0.2)
    first = lsq_ineq(X, y, G, h, np.ones(3))
    again = lsq_ineq(X, y, G, h, np.ones(3))
    assert np.array_equal(first[0], again[0]) and first[1] == again[1]


@settings(max_examples=25)
@given(seed=st.integers(0, 10_000), m=st.integers(1, 12))
def test_agrees_with_general_solver(seed, m):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 3))
    y = rng.normal(size=30)
    G = rng.normal(size=(m, 3))
    a0 = rng.normal(size=3)
    h = G @ a0 - rng.uniform(0.0, 1.0, m)
    a, _ = lsq_ineq(X, y, G, h, a0)
    assert np.all(G @ a - h >= -1e-8)

    def f(v):
        r = X @ v - y
        return r @ r

    ref = minimize(f, a0, jac=lambda v: 2 * X.T @ (X @ v - y), method="SLSQP",
                   constraints=[{"type": "ineq", "fun": lambda v: G @ v - h, "jac": lambda v: G}],
                   options={"ftol": 1e-14, "maxiter": 500})
    assert f(a) <= ref.fun + 1e-7 * max(1.0, ref.fun)

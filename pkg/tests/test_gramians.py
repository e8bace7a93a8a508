"""Lyapunov solver, Gramians, mean-square cost and its limit gradient matrix."""

import numpy as np
import pytest

from qefsyn.errors import NumericalError, ValidationError
from qefsyn.gramians import chi0, gramian_set, lqg_cost, solve_lyapunov


def test_solve_lyapunov_scalar():
    # a x + x a + w = 0 with a = -2, w = 4  ->  x = 1
    X = solve_lyapunov(np.array([[-2.0]]), np.array([[4.0]]))
    assert np.isclose(X[0, 0], 1.0)


def test_solve_lyapunov_residual(rng):
    A = rng.standard_normal((4, 4)) - 3.0 * np.eye(4)
    W0 = rng.standard_normal((4, 4))
    W = W0 @ W0.T
    X = solve_lyapunov(A, W)
    assert np.max(np.abs(A @ X + X @ A.T + W)) <= 1e-10 * (1 + np.max(np.abs(W)))
    assert np.min(np.linalg.eigvalsh(X)) >= -1e-12


def test_solve_lyapunov_rejects_unstable():
    with pytest.raises(NumericalError):
        solve_lyapunov(np.eye(2), np.eye(2))


def test_solve_lyapunov_rejects_asymmetric_w():
    with pytest.raises(ValidationError):
        solve_lyapunov(-np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_gramian_set_properties(cl_square):
    g = gramian_set(cl_square)
    assert np.allclose(g.Sigma, g.Sigma.T)
    assert np.min(np.linalg.eigvalsh(g.Sigma)) >= -1e-12
    assert np.min(np.linalg.eigvalsh(g.sQ)) >= -1e-12
    assert np.allclose(g.sH, g.sQ @ g.sP)
    # sP is the controllability Gramian = steady covariance here
    assert g.sP is g.Sigma


def test_lqg_cost_positive(cl_square):
    assert lqg_cost(cl_square) > 0


def test_lqg_cost_zero_for_zero_weights(canonical_plant, cl_square):
    from qefsyn.model import assemble_closed_loop
    cl0 = assemble_closed_loop(canonical_plant,
                               (np.zeros((2, 2)), np.zeros((2, 1))),
                               cl_square.ctrl)
    assert lqg_cost(cl0) == 0.0


def test_chi0_block_structure(cl_square):
    g = gramian_set(cl_square)
    X = chi0(cl_square).T
    two_n, m, nu = 4, cl_square.m, cl_square.nu
    assert X.shape == (two_n + nu, two_n + m)
    assert np.allclose(X[:two_n, :two_n], g.sH)
    assert np.allclose(X[:two_n, two_n:], g.sQ @ cl_square.calB)
    assert np.allclose(X[two_n:, :two_n], cl_square.calC @ g.sP)
    assert np.allclose(X[two_n:, two_n:], 0)

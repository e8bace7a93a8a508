"""Quadrature machinery, per-frequency quantities, growth rate, admissibility."""

import numpy as np
import pytest

from qefsyn.errors import InadmissibleError
from qefsyn.freq import (
    QuadratureConfig,
    check_admissible,
    default_lambda_max,
    delta_matrix,
    growth_rate_grid,
    integrate_half_line,
    log_det_delta,
    qef_growth_rate,
    resolvent,
    resonance_breakpoints,
    spec1_value,
    spectral_pair,
    theta_for_spec1,
    transfer,
)
from qefsyn.gramians import lqg_cost
from qefsyn.model import ControllerParams, assemble_closed_loop


def _vec(f):
    return lambda lams: np.array([[f(lam)] for lam in lams])


def test_half_line_lorentzian():
    # int_0^inf 1/(1+x^2) dx = pi/2; the tail map handles the 1/x^2 decay
    quad = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-12)
    val, err, _ = integrate_half_line(_vec(lambda x: 1.0 / (1.0 + x * x)),
                                      10.0, quad)
    assert abs(val[0] - np.pi / 2) <= 1e-10
    assert err <= 1e-10


def test_half_line_exact_tail_decay():
    # f = 1/(1+x)^2 integrates to 1; the u = 1/x substitution is exact-ish
    quad = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-12)
    val, _, _ = integrate_half_line(_vec(lambda x: (1.0 + x) ** -2), 5.0, quad)
    assert abs(val[0] - 1.0) <= 1e-10


def test_frozen_grid_reproduces_adaptive():
    quad = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-12)
    f = _vec(lambda x: np.exp(-x) * np.cos(3 * x))
    val, _, grid = integrate_half_line(f, 20.0, quad)
    val2, _, grid2 = integrate_half_line(f, 20.0, quad, grid=grid)
    assert grid2 is grid
    assert abs(val[0] - val2[0]) <= 1e-14


def test_breakpoints_seed_subdivision():
    # a spike much narrower than the initial panel is caught only when a
    # breakpoint lands near it
    eps = 1e-2
    spike = _vec(lambda x: 1.0 / (eps**2 + (x - 7.0) ** 2))
    quad = QuadratureConfig(abs_tol=1e-10, rel_tol=1e-9)
    val, err, _ = integrate_half_line(spike, 50.0, quad,
                                      breakpoints=(6.99, 7.0, 7.01))
    exact = (np.pi / 2 + np.arctan(7.0 / eps)) / eps
    assert abs(val[0] - exact) <= 1e-6 * exact


def test_resonance_breakpoints_cover_imag_parts(cl_square):
    lam_max = default_lambda_max(cl_square.calA)
    pts = resonance_breakpoints(cl_square.calA, lam_max)
    omegas = {abs(e.imag) for e in np.linalg.eigvals(cl_square.calA)
              if 0 < abs(e.imag) < lam_max}
    for w in omegas:
        assert any(abs(p - w) < 1e-9 for p in pts)


def test_resolvent_identity(cl_square):
    G = resolvent(cl_square.calA, 1.3)
    assert np.allclose((1j * 1.3 * np.eye(4) - cl_square.calA) @ G, np.eye(4))


def test_transfer_conjugate_evenness(cl_square):
    # F(-lambda) = conj(F(lambda)) for real state-space matrices
    F1 = transfer(cl_square, 0.7)
    F2 = transfer(cl_square, -0.7)
    assert np.allclose(F2, F1.conj())


def test_spectral_pair_symmetry_classes(cl_square):
    Phi, Psi = spectral_pair(cl_square, 0.9)
    assert np.allclose(Phi, Phi.conj().T)
    assert np.allclose(Psi, -Psi.conj().T)
    assert np.min(np.linalg.eigvalsh(Phi)) >= -1e-12


def test_delta_matrix_theta_zero(cl_square):
    Phi, Psi = spectral_pair(cl_square, 0.4)
    assert np.allclose(delta_matrix(Phi, Psi, 0.0), np.eye(2))


def test_log_det_delta_real_and_matches_direct(cl_square):
    theta = 0.05
    val = log_det_delta(cl_square, 0.8, theta)
    Phi, Psi = spectral_pair(cl_square, 0.8)
    direct = np.linalg.slogdet(delta_matrix(Phi, Psi, theta))
    assert np.isclose(val, direct[1], atol=1e-10)
    assert isinstance(val, float)


def test_log_det_delta_inadmissible_at_large_theta(cl_square):
    # near the peak frequency a huge theta violates the spectral condition
    with pytest.raises(InadmissibleError):
        for lam in np.linspace(0.0, 5.0, 60):
            log_det_delta(cl_square, lam, 1e3)


def test_growth_rate_zero_cases(cl_square, canonical_plant, quad_fast):
    assert qef_growth_rate(cl_square, 0.0) == 0.0
    cl0 = assemble_closed_loop(canonical_plant,
                               (np.zeros((2, 2)), np.zeros((2, 1))),
                               cl_square.ctrl)
    assert abs(qef_growth_rate(cl0, 0.1, quad_fast)) <= 1e-10


def test_growth_rate_monotone_in_theta(cl_square, quad_fast):
    thetas = [0.02, 0.05, 0.1]
    vals = [qef_growth_rate(cl_square, t, quad_fast) for t in thetas]
    assert vals[0] > 0
    # Ups/theta is nondecreasing in theta (exponential penalty convexity)
    rates = [v / t for v, t in zip(vals, thetas)]
    slack = 1e-7 * (1 + rates[0])
    assert rates[0] <= rates[1] + slack <= rates[2] + 2 * slack


def test_growth_rate_exceeds_small_risk_linearization(cl_square, quad_fast):
    theta = 0.1
    assert qef_growth_rate(cl_square, theta, quad_fast) \
        >= theta * lqg_cost(cl_square) * (1 - 1e-8)


def test_growth_rate_requires_hurwitz(canonical_plant, weights_square):
    ctrl = ControllerParams(a=np.eye(2), b=np.zeros((2, 1)),
                            c=np.zeros((1, 2)))
    cl = assemble_closed_loop(canonical_plant, weights_square, ctrl)
    with pytest.raises(InadmissibleError):
        qef_growth_rate(cl, 0.1)


def test_growth_rate_grid_reuse(cl_square, quad_fast):
    theta = 0.05
    grid = growth_rate_grid(cl_square, theta, quad_fast)
    v1 = qef_growth_rate(cl_square, theta, quad_fast)
    v2 = qef_growth_rate(cl_square, theta, quad_fast, grid=grid)
    assert abs(v1 - v2) <= 1e-7 * (1 + abs(v1))


def test_check_admissible_canonical(cl_square):
    rep = check_admissible(cl_square, 0.05)
    assert rep.hurwitz and rep.spec1_ok and rep.psi_ok and rep.admissible
    assert 0 < rep.spec1_sup < 1


def test_check_admissible_unstable(canonical_plant, weights_square):
    ctrl = ControllerParams(a=np.eye(2), b=np.zeros((2, 1)),
                            c=np.zeros((1, 2)))
    cl = assemble_closed_loop(canonical_plant, weights_square, ctrl)
    rep = check_admissible(cl, 0.05)
    assert not rep.hurwitz and not rep.admissible


def test_spec1_value_zero_theta(cl_square):
    assert spec1_value(cl_square, 0.0, 1.0) == 0.0


def test_theta_for_spec1_hits_target(cl_square):
    target = 0.3
    theta = theta_for_spec1(cl_square, target)
    grid = np.linspace(0.0, default_lambda_max(cl_square.calA), 400)
    sup = max(spec1_value(cl_square, theta, lam) for lam in grid)
    assert abs(sup - target) <= 0.02


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=-1.0)
    with pytest.raises(ValueError):
        QuadratureConfig(lambda_max=0.0)

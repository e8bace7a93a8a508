"""Canonical and randomized problem instances for tests and experiments."""

import numpy as np

from qefsyn.errors import NumericalError, ValidationError
from qefsyn.freq import check_admissible, theta_for_spec1
from qefsyn.model import (
    ControllerParams,
    PlantSpec,
    assemble_closed_loop,
    build_J,
    derive_plant,
    is_hurwitz,
)
from qefsyn.synth import lqg_controller

__all__ = [
    "canonical_plant_spec",
    "canonical_weights_square",
    "canonical_weights_lqg",
    "random_plant_spec",
    "random_stable_instance",
    "random_admissible_instance",
]


def canonical_plant_spec():
    """Single-mode plant: unit commutation matrix, identity energy/coupling."""
    bJ = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return PlantSpec(
        Theta=bJ,
        R=np.eye(2),
        M=np.eye(2),
        N=np.array([[0.5, 0.3]]),
        D=np.array([[1.0, 0.0]]),
    )


def canonical_weights_square():
    """nu = 2 weights with invertible transfer, usable by the gradient path."""
    S = np.eye(2)
    K = np.array([[0.0], [1.0]])
    return S, K


def canonical_weights_lqg():
    """nu = 3 stacked state/control penalty (classical risk-sensitive form)."""
    S = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    K = np.array([[0.0], [0.0], [1.0]])
    return S, K


def random_plant_spec(rng, n=2, m=2, d=1, r=1):
    """Random physical parameters with all realizability invariants satisfied.

    D is drawn as [D1, 0] with D1 full row rank, which makes the
    measurement commutation condition hold identically.
    """
    half = m // 2
    T0 = rng.standard_normal((n, n))
    Theta = T0 - T0.T
    Theta /= max(np.max(np.abs(Theta)), 1e-3)
    R0 = rng.standard_normal((n, n))
    R = 0.5 * (R0 + R0.T)
    M = rng.standard_normal((m, n))
    N = rng.standard_normal((d, n))
    while True:
        D1 = rng.standard_normal((r, half))
        if np.min(np.linalg.svd(D1, compute_uv=False)) > 0.3:
            break
    D = np.hstack([D1, np.zeros((r, half))])
    return PlantSpec(Theta=Theta, R=R, M=M, N=N, D=D)


def random_stable_instance(rng, n=2, m=2, d=1, r=1, weights=None,
                           max_tries=50):
    """A random plant with its LQG controller (hence a Hurwitz closed loop)."""
    if weights is None:
        weights = canonical_weights_square() if n == 2 else None
    for _ in range(max_tries):
        try:
            spec = random_plant_spec(rng, n=n, m=m, d=d, r=r)
            plant = derive_plant(spec)
            ctrl = lqg_controller(plant, weights)
        except (NumericalError, ValidationError):
            continue
        cl = assemble_closed_loop(plant, weights, ctrl)
        if is_hurwitz(cl.calA):
            return plant, ctrl, cl
    raise NumericalError("failed to draw a stabilizable random instance")


def random_admissible_instance(rng, theta_fraction=0.25, perturb=0.05,
                               max_tries=50):
    """Random n=2, m=2, r=1, d=1 instance admissible at a safe risk level.

    The controller is the LQG solution plus a small random perturbation
    (so the gradient is not already near zero); theta is chosen so that
    the supremum of the spectral condition equals ``theta_fraction``,
    which keeps the integrands well conditioned.  Instances whose Psi is
    near-singular on the frequency grid are redrawn.
    """
    weights = canonical_weights_square()
    for _ in range(max_tries):
        try:
            plant, ctrl, _ = random_stable_instance(rng, weights=weights)
        except NumericalError:
            continue
        dctrl = ControllerParams(
            a=perturb * rng.standard_normal(ctrl.a.shape),
            b=perturb * rng.standard_normal(ctrl.b.shape),
            c=perturb * rng.standard_normal(ctrl.c.shape),
        )
        ctrl = ctrl + dctrl
        cl = assemble_closed_loop(plant, weights, ctrl)
        if not is_hurwitz(cl.calA):
            continue
        # reject nearly undamped loops: their razor-thin resonance peaks
        # make every finite-difference validation ill-conditioned
        eigs = np.linalg.eigvals(cl.calA)
        if np.min(-eigs.real / np.abs(eigs)) < 0.05:
            continue
        theta = theta_for_spec1(cl, theta_fraction)
        report = check_admissible(cl, theta)
        if report.admissible:
            return plant, ctrl, cl, theta
    raise NumericalError("failed to draw an admissible random instance")

"""Plant construction, physical-realizability checks, closed-loop assembly.

The plant is a multimode open quantum harmonic oscillator with state-space
matrices derived from its physical parameters (commutation matrix, energy
matrix, field/control couplings, measurement matrix).  A classical linear
controller closes the loop; the joint system matrices are affine in the
controller triple (a, b, c).
"""

from dataclasses import dataclass, field

import numpy as np

from qefsyn.errors import ValidationError

__all__ = [
    "PlantSpec",
    "DerivedPlant",
    "ControllerParams",
    "ClosedLoop",
    "build_J",
    "derive_plant",
    "validate_measurement",
    "assemble_closed_loop",
    "is_hurwitz",
]

#: absolute residual tolerance for realizability identities
PR_TOL = 1e-10

#: eigenvalue margin separating Hurwitz from marginal
HURWITZ_MARGIN = 1e-9


def build_J(m):
    """Block antisymmetric orthogonal matrix [[0, I], [-I, 0]] of order m."""
    if m % 2 != 0 or m < 2:
        raise ValidationError(f"field channel count must be even >= 2, got {m}")
    h = m // 2
    J = np.zeros((m, m))
    J[:h, h:] = np.eye(h)
    J[h:, :h] = -np.eye(h)
    return J


def _check_real(name, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.all(np.isfinite(M)):
        raise ValidationError(f"{name} has non-finite entries")
    return M


@dataclass(frozen=True)
class PlantSpec:
    """Physical parameters of the quantum plant.

    Theta is the real antisymmetric commutation matrix of the n plant
    variables, R the symmetric energy matrix, M and N the field and control
    coupling matrices, and D the static measurement matrix acting on the m
    output field channels to produce r commuting observation channels.
    """

    Theta: np.ndarray
    R: np.ndarray
    M: np.ndarray
    N: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        Theta = _check_real("Theta", self.Theta)
        R = _check_real("R", self.R)
        M = _check_real("M", self.M)
        N = _check_real("N", self.N)
        D = _check_real("D", self.D)
        object.__setattr__(self, "Theta", Theta)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "D", D)
        n = Theta.shape[0]
        if Theta.shape != (n, n) or n % 2 != 0:
            raise ValidationError("Theta must be square of even order")
        if np.max(np.abs(Theta + Theta.T)) > PR_TOL:
            raise ValidationError("Theta must be antisymmetric")
        if R.shape != (n, n) or np.max(np.abs(R - R.T)) > PR_TOL:
            raise ValidationError("R must be symmetric of the plant order")
        m = M.shape[0]
        if m % 2 != 0 or M.shape != (m, n):
            raise ValidationError("M must have an even number of rows and n columns")
        if N.shape[1] != n:
            raise ValidationError("N must have n columns")
        r = D.shape[0]
        if D.shape != (r, m):
            raise ValidationError("D must have m columns")
        if r > m // 2:
            raise ValidationError(
                f"observation channel count r={r} exceeds m/2={m // 2}: "
                "a commuting measurement needs r <= m/2"
            )
        validate_measurement(D, build_J(m))

    @property
    def n(self):
        return self.Theta.shape[0]

    @property
    def m(self):
        return self.M.shape[0]

    @property
    def d(self):
        return self.N.shape[0]

    @property
    def r(self):
        return self.D.shape[0]


def validate_measurement(D, J):
    """Check full row rank of D and vanishing of D J D^T.

    The first condition makes the observation noise nondegenerate, the
    second makes the observation channels mutually commuting and hence
    simultaneously measurable.
    """
    D = _check_real("D", D)
    DDt = D @ D.T
    if np.min(np.linalg.eigvalsh(DDt)) <= 1e-10:
        raise ValidationError("D D^T is singular: D must have full row rank")
    DJDt = D @ J @ D.T
    if np.max(np.abs(DJDt)) > 1e-12:
        raise ValidationError(
            "D J D^T != 0: observation channels do not commute"
        )


@dataclass(frozen=True)
class DerivedPlant:
    """State-space matrices of the plant, derived from a PlantSpec."""

    spec: PlantSpec
    A: np.ndarray
    B: np.ndarray
    E: np.ndarray
    C: np.ndarray
    J: np.ndarray
    Omega: np.ndarray

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def d(self):
        return self.E.shape[1]

    @property
    def r(self):
        return self.C.shape[0]

    @property
    def Theta(self):
        return self.spec.Theta

    @property
    def D(self):
        return self.spec.D


def derive_plant(spec):
    """Derive (A, B, E, C) from the physical parameters and verify PR.

    A = 2 Theta (R + M^T J M), B = 2 Theta M^T, E = 2 Theta N^T,
    C = 2 D J M.  The realizability identities
    A Theta + Theta A^T + B J B^T = 0 and Theta C^T + B J D^T = 0
    hold by construction; their residuals are asserted.
    """
    Theta, R, M, N, D = spec.Theta, spec.R, spec.M, spec.N, spec.D
    J = build_J(spec.m)
    A = 2.0 * Theta @ (R + M.T @ J @ M)
    B = 2.0 * Theta @ M.T
    E = 2.0 * Theta @ N.T
    C = 2.0 * D @ J @ M
    scale = 1.0 + max(np.max(np.abs(A)), np.max(np.abs(B)))
    res_ab = np.max(np.abs(A @ Theta + Theta @ A.T + B @ J @ B.T))
    if res_ab > PR_TOL * scale:
        raise ValidationError(
            f"realizability residual A Theta + Theta A^T + B J B^T = {res_ab:.2e}"
        )
    res_c = np.max(np.abs(Theta @ C.T + B @ J @ D.T))
    if res_c > PR_TOL * scale:
        raise ValidationError(
            f"realizability residual Theta C^T + B J D^T = {res_c:.2e}"
        )
    Omega = np.eye(spec.m) + 1j * J
    return DerivedPlant(spec=spec, A=A, B=B, E=E, C=C, J=J, Omega=Omega)


@dataclass(frozen=True)
class ControllerParams:
    """State-space triple (a, b, c) of the classical controller."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = _check_real("a", self.a)
        b = _check_real("b", self.b)
        c = _check_real("c", self.c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValidationError("a must be square")
        if b.shape[0] != n or c.shape[1] != n:
            raise ValidationError("b, c must match the controller order")

    def __add__(self, other):
        return ControllerParams(self.a + other.a, self.b + other.b,
                                self.c + other.c)

    @staticmethod
    def zeros(n, r, d):
        return ControllerParams(np.zeros((n, n)), np.zeros((n, r)),
                                np.zeros((d, n)))


@dataclass(frozen=True)
class ClosedLoop:
    """Assembled closed-loop system matrices for a plant/controller pair."""

    plant: DerivedPlant
    ctrl: ControllerParams
    S: np.ndarray
    K: np.ndarray
    calA: np.ndarray = field(repr=False, default=None)
    calB: np.ndarray = field(repr=False, default=None)
    calC: np.ndarray = field(repr=False, default=None)
    Gamma: np.ndarray = field(repr=False, default=None)

    @property
    def n(self):
        return self.plant.n

    @property
    def m(self):
        return self.plant.m

    @property
    def nu(self):
        return self.calC.shape[0]

    @property
    def J(self):
        return self.plant.J


def assemble_closed_loop(plant, weights, ctrl):
    """Assemble the joint system matrices for a plant/controller pair.

    calA = [[A, E c], [b C, a]], calB = [[B], [b D]], calC = [S, K c]; the
    joint commutation matrix is Gamma = blockdiag(Theta, 0).  The joint
    realizability identity calA Gamma + Gamma calA^T + calB J calB^T = 0
    holds for any (a, b, c) and is asserted.
    """
    S, K = (np.atleast_2d(np.asarray(w, dtype=float)) for w in weights)
    n, m, d, r = plant.n, plant.m, plant.d, plant.r
    a, b, c = ctrl.a, ctrl.b, ctrl.c
    if a.shape != (n, n) or b.shape != (n, r) or c.shape != (d, n):
        raise ValidationError(
            f"controller shapes {a.shape}, {b.shape}, {c.shape} do not match "
            f"plant dimensions n={n}, r={r}, d={d}"
        )
    nu = S.shape[0]
    if S.shape != (nu, n) or K.shape != (nu, d):
        raise ValidationError("weights S, K must be nu x n and nu x d")

    calA = np.block([[plant.A, plant.E @ c], [b @ plant.C, a]])
    calB = np.vstack([plant.B, b @ plant.D])
    calC = np.hstack([S, K @ c])
    Gamma = np.zeros((2 * n, 2 * n))
    Gamma[:n, :n] = plant.Theta

    scale = 1.0 + np.max(np.abs(calA)) + np.max(np.abs(calB)) ** 2
    res = np.max(np.abs(calA @ Gamma + Gamma @ calA.T + calB @ plant.J @ calB.T))
    if res > PR_TOL * scale:
        raise ValidationError(f"joint realizability residual {res:.2e}")
    return ClosedLoop(plant=plant, ctrl=ctrl, S=S, K=K,
                      calA=calA, calB=calB, calC=calC, Gamma=Gamma)


def is_hurwitz(calA):
    """True iff every eigenvalue has real part below the stability margin."""
    calA = np.asarray(calA)
    return bool(np.max(np.linalg.eigvals(calA).real) < -HURWITZ_MARGIN)

"""Closed-form single-qubit channel and coupling math.

Everything here is a pure function of the protocol angles: the weak-measurement
Kraus operators, the effective measurement strength, the couplings of the
classical two-layer spin model the network contraction works with, the active
and passive disorder probabilities, and the Hadamard duality transform on
parameters.

Angles are stored in units of pi (``t_over_pi`` etc.) so that thresholds are
exactly representable in config files.  Saturated couplings (``K`` at
``theta=0``, ``beta`` at ``t=pi/4``) keep ``math.inf`` in the scalar record,
but the weights consumed by gate builders (``exp_minus_2k``) are exact finite
numbers, so no floating infinity ever enters a tensor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

#: replica index for the forced all-plus (post-selected) ensemble
INF_REPLICA = math.inf

_T_MAX = 0.25  # t/pi upper end of the parameter interval


def _check_t_over_pi(t_over_pi: float) -> None:
    if not 0.0 <= t_over_pi <= _T_MAX + 1e-12:
        raise ValueError(f"t/pi={t_over_pi} outside [0, 1/4]")


def _check_theta_over_pi(theta_over_pi: float) -> None:
    if not 0.0 <= theta_over_pi <= 0.5 + 1e-12:
        raise ValueError(f"theta/pi={theta_over_pi} outside [0, 1/2]")


@dataclass(frozen=True)
class ProtocolParams:
    """One experiment point of the teleportation protocol.

    ``n_replica`` is 1 (Born sampling), 2 (doubled network) or ``math.inf``
    (forced all-plus outcomes).  ``svd_cutoff=0`` disables truncation.
    """

    t_over_pi: float
    theta_over_pi: float = 0.0
    phi_over_pi: float = 0.0
    d: int = 8
    n_replica: float = 1
    seed: int = 0
    chi_max: int = 256
    svd_cutoff: float = 1e-10

    def __post_init__(self):
        _check_t_over_pi(self.t_over_pi)
        _check_theta_over_pi(self.theta_over_pi)
        if self.d < 2:
            raise ValueError(f"code distance d={self.d} must be >= 2")
        if self.n_replica not in (1, 2, INF_REPLICA):
            raise ValueError(f"n_replica={self.n_replica} not in {{1, 2, inf}}")
        if self.chi_max < 2:
            raise ValueError(f"chi_max={self.chi_max} must be >= 2")
        if not 0.0 <= self.svd_cutoff < 1.0:
            raise ValueError(f"svd_cutoff={self.svd_cutoff} outside [0, 1)")

    @property
    def t(self) -> float:
        return self.t_over_pi * math.pi

    @property
    def theta(self) -> float:
        return self.theta_over_pi * math.pi

    @property
    def phi(self) -> float:
        return self.phi_over_pi * math.pi


@dataclass(frozen=True)
class Couplings:
    """Dimensionless couplings of the two-layer classical spin model.

    ``j`` couples each layer along a bond, ``k`` is the four-spin inter-layer
    coupling and ``beta`` the measurement strength.  ``exp_minus_2k`` carries
    the exact bond weight e^(-2K); it is 0.0 when ``k`` is saturated.
    """

    j: float
    k: float
    beta: float
    exp_minus_2k: float

    @property
    def j_saturated(self) -> bool:
        return math.isinf(self.j)

    @property
    def k_saturated(self) -> bool:
        return math.isinf(self.k)

    @property
    def beta_saturated(self) -> bool:
        return math.isinf(self.beta)


def beta_from_t(t: float) -> float:
    """Effective measurement strength beta = atanh(sin 2t); inf at t=pi/4."""
    if not 0.0 <= t <= math.pi / 4 + 1e-12:
        raise ValueError(f"t={t} outside [0, pi/4]")
    s = math.sin(2.0 * t)
    if s >= 1.0:
        return math.inf
    return math.atanh(s)


def couplings_from(t: float, theta: float) -> Couplings:
    """Couplings (J, K, beta) at measurement angle theta.

    J = atanh(sin 2t cos theta) and e^(-2K) = sinh(J) tan(theta).  The weight
    e^(-2K) is evaluated through the equivalent form sin(2t) sin(theta) cosh(J),
    which stays finite at theta=pi/2 where J=0, and is exactly 0 at theta=0.
    """
    if not 0.0 <= t <= math.pi / 4 + 1e-12:
        raise ValueError(f"t={t} outside [0, pi/4]")
    if not 0.0 <= theta <= math.pi / 2 + 1e-12:
        raise ValueError(f"theta={theta} outside [0, pi/2]")
    beta = beta_from_t(t)
    st = math.sin(2.0 * t)
    x = st * math.cos(theta)
    if abs(x) < 1e-15:
        x = 0.0  # explicit J=0 limit at theta=pi/2
    j = math.inf if x >= 1.0 else math.atanh(x)
    if theta == 0.0 or math.sin(theta) == 0.0:
        e2k = 0.0
    elif math.isinf(j):
        # only reachable at t=pi/4, theta=0, already covered above
        e2k = 0.0
    else:
        e2k = st * math.sin(theta) * math.cosh(j)
    k = math.inf if e2k == 0.0 else -0.5 * math.log(e2k)
    return Couplings(j=j, k=k, beta=beta, exp_minus_2k=e2k)


def measurement_axis(theta: float, phi: float) -> np.ndarray:
    """Pauli axis sin(th)cos(ph) X + sin(th)sin(ph) Y + cos(th) Z as a 2x2 matrix."""
    return (
        math.sin(theta) * math.cos(phi) * PAULI_X
        + math.sin(theta) * math.sin(phi) * PAULI_Y
        + math.cos(theta) * PAULI_Z
    )


def kraus_matrix(t: float, theta: float, phi: float, s: int) -> np.ndarray:
    """Weak-measurement Kraus operator for outcome s = +-1.

    M_s = exp(beta/2 s n.sigma) / sqrt(2 cosh beta).  At t=pi/4 the saturated
    limit is the rank-1 projector (1 + s n.sigma)/2.
    """
    if s not in (1, -1):
        raise ValueError(f"outcome s={s} must be +-1")
    beta = beta_from_t(t)
    axis = measurement_axis(theta, phi)
    if math.isinf(beta):
        return 0.5 * (np.eye(2, dtype=complex) + s * axis)
    c = math.cosh(0.5 * beta)
    h = math.sinh(0.5 * beta)
    norm = math.sqrt(2.0 * math.cosh(beta))
    return (c * np.eye(2, dtype=complex) + (s * h) * axis) / norm


def disorder_prob(t: float, mode: str) -> float:
    """Bond-sign flip probability: active sin^2(pi/4 - t), passive sin^2(t)."""
    if not 0.0 <= t <= math.pi / 4 + 1e-12:
        raise ValueError(f"t={t} outside [0, pi/4]")
    if mode == "active":
        return math.sin(math.pi / 4 - t) ** 2
    if mode == "passive":
        return math.sin(t) ** 2
    raise ValueError(f"unknown disorder mode {mode!r}")


def hadamard_dual_params(params: ProtocolParams) -> ProtocolParams:
    """Reflect theta -> pi/2 - theta (qubit-wise Hadamard frame).

    Together with the lattice dual this leaves all observables invariant.
    Only supported at phi = 0.
    """
    if params.phi_over_pi != 0.0:
        raise ValueError("Hadamard duality is only supported at phi=0")
    return ProtocolParams(
        t_over_pi=params.t_over_pi,
        theta_over_pi=0.5 - params.theta_over_pi,
        phi_over_pi=0.0,
        d=params.d,
        n_replica=params.n_replica,
        seed=params.seed,
        chi_max=params.chi_max,
        svd_cutoff=params.svd_cutoff,
    )

"""Dense state-vector reference at small code distance.

Prepares the logical-Bell state of the distance-d planar code, enumerates all
2^N measurement-outcome configurations, and computes exact outcome
probabilities, reference-qubit density matrices, polarization vectors and
(Renyi) coherent information.  Every other module is tested against this one.

Outcomes are visited in reflected Gray-code order so each step updates a
single site's Kraus factor, which keeps the d=3 enumeration (8192 outcomes on
a 2^14-amplitude vector) at interactive speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import kraus_matrix
from .lattice import PlanarCodeLattice, SPIN_LEFT, SPIN_RIGHT, build_planar_code

_MAX_ORACLE_D = 3  # dense vectors stay <= 2^14 amplitudes


@dataclass
class LogicalBellState:
    """Reference qubit maximally entangled with the planar-code logical qubit.

    ``amplitudes[k]`` is the code-qubit vector paired with reference state
    |k> in the Z basis; the logical basis used for overlaps is the pair of
    logical-X eigenstates psi_plus/psi_minus.
    """

    d: int
    lattice: PlanarCodeLattice
    amplitudes: np.ndarray  # (2, 2**N) complex
    logical_x_support: tuple
    logical_z_support: tuple

    @property
    def n_qubits(self) -> int:
        return self.lattice.n_qubits

    def psi_pm(self):
        """The two logical-X eigenstates as dense vectors."""
        plus = self.amplitudes[0] + self.amplitudes[1]
        minus = self.amplitudes[0] - self.amplitudes[1]
        return plus / np.linalg.norm(plus), minus / np.linalg.norm(minus)

    def reference_reduced(self) -> np.ndarray:
        a = self.amplitudes
        return a @ a.conj().T


def prepare_logical_bell(d: int) -> LogicalBellState:
    """Build the logical-Bell state by summing the dual-spin representation.

    Each spin configuration sigma contributes the product state with qubit q
    in Z eigenstate sigma_i sigma_j of its bond; the relative parity of the
    two glued boundary spins is the logical Z value.
    """
    if d < 2:
        raise ValueError(f"code distance d={d} must be >= 2")
    if d > _MAX_ORACLE_D:
        raise ValueError(f"dense oracle refuses d={d} > {_MAX_ORACLE_D} (memory guard)")
    lat = build_planar_code(d)
    n = lat.n_qubits
    n_spins = lat.n_spins
    bond_i = np.array([b[0] for b in lat.bonds])
    bond_j = np.array([b[1] for b in lat.bonds])
    psi_z = np.zeros((2, 2 ** n))  # indexed by logical Z sector
    for cfg in range(2 ** n_spins):
        bits = (cfg >> np.arange(n_spins)) & 1
        s = 1 - 2 * bits
        qbits = ((1 - s[bond_i] * s[bond_j]) // 2).astype(np.int64)
        idx = int(np.dot(qbits, 1 << np.arange(n)))
        sector = 0 if s[SPIN_LEFT] * s[SPIN_RIGHT] == 1 else 1
        psi_z[sector, idx] += 1.0
    psi_z[0] /= np.linalg.norm(psi_z[0])
    psi_z[1] /= np.linalg.norm(psi_z[1])
    # |Psi> = (|psi_z0>|0> + |psi_z1>|1>)/sqrt(2) equals the logical-X Bell pairing
    amp = psi_z.astype(complex) / math.sqrt(2.0)
    return LogicalBellState(
        d=d,
        lattice=lat,
        amplitudes=amp,
        logical_x_support=lat.boundary_star("left"),
        logical_z_support=lat.top_row_qubits(),
    )


def apply_single_site(vec: np.ndarray, op: np.ndarray, site: int) -> np.ndarray:
    """Apply a 2x2 operator on one code qubit of a (..., 2**N) vector."""
    lead = vec.shape[:-1]
    v = vec.reshape(lead + (-1, 2, 2 ** site))
    out = np.einsum("ab,...bj->...aj", op, v)
    return out.reshape(vec.shape)


def pauli_string_expectation(state: LogicalBellState, pauli: str, support) -> complex:
    """<Psi| P |Psi> for a product of one Pauli kind over the given qubits."""
    from .channel import PAULI_X, PAULI_Z

    op = {"X": PAULI_X, "Z": PAULI_Z}[pauli]
    v = state.amplitudes.copy()
    for q in support:
        v = apply_single_site(v, op, q)
    return complex(np.vdot(state.amplitudes, v))


def _gray_flip_sequence(n: int):
    """Site flipped at each step of the reflected Gray walk over n bits."""
    for k in range(1, 2 ** n):
        yield (k & -k).bit_length() - 1


@dataclass
class OutcomeResult:
    outcomes: np.ndarray  # +-1 per qubit site
    p: float
    p_pp: float
    p_mm: float
    p_pm: complex
    kappa: tuple  # (kx, ky, kz)

    def rho_r(self) -> np.ndarray:
        kx, ky, kz = self.kappa
        return 0.5 * np.array([[1 + kz, kx - 1j * ky], [kx + 1j * ky, 1 - kz]])

    @property
    def kappa_norm(self) -> float:
        return float(np.sqrt(sum(abs(k) ** 2 for k in self.kappa)))

    def entropy(self) -> float:
        return binary_entropy((1.0 + min(self.kappa_norm, 1.0)) / 2.0)


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * math.log(p) - (1 - p) * math.log(1 - p))


def _result_from_frame(outcomes, w: np.ndarray) -> OutcomeResult:
    """Build an OutcomeResult from the deformed logical frame [M psi+, M psi-]."""
    g = w @ w.conj().T
    p_pp = float(g[0, 0].real)
    p_mm = float(g[1, 1].real)
    p_pm = complex(np.conj(g[0, 1]))  # g[0,1] = <M psi-|M psi+> = conj(P_plus_minus)
    tot = p_pp + p_mm
    if tot > 1e-300:
        kx = (p_pp - p_mm) / tot
        kzy = 2.0 * p_pm / tot
        kappa = (kx, float(kzy.imag), float(kzy.real))
    else:
        kappa = (0.0, 0.0, 0.0)  # zero-probability outcome at the projective limit
    return OutcomeResult(
        outcomes=np.asarray(outcomes, dtype=np.int8).copy(),
        p=tot / 2.0,
        p_pp=p_pp,
        p_mm=p_mm,
        p_pm=p_pm,
        kappa=kappa,
    )


def enumerate_outcomes(state: LogicalBellState, t: float, theta: float,
                       phi: float = 0.0):
    """Exact per-outcome data for every s in {+-1}^N.

    Returns a list of OutcomeResult in Gray-code enumeration order; the Born
    probabilities sum to one.
    """
    n = state.n_qubits
    m_plus = kraus_matrix(t, theta, phi, 1)
    m_minus = kraus_matrix(t, theta, phi, -1)
    plus, minus = state.psi_pm()
    base = np.vstack([plus, minus])  # rows: logical-X frame [psi+, psi-]
    outcomes = np.ones(n, dtype=np.int8)
    results = []

    def fresh(s):
        wk = base.copy()
        for q in range(n):
            wk = apply_single_site(wk, m_plus if s[q] == 1 else m_minus, q)
        return wk

    if t >= math.pi / 4 - 1e-12:
        # projective limit: Kraus factors are singular, enumerate directly
        for code in range(2 ** n):
            bits = (code >> np.arange(n)) & 1
            s = (1 - 2 * bits).astype(np.int8)
            results.append(_result_from_frame(s, fresh(s)))
        return results
    w = fresh(outcomes)
    results.append(_result_from_frame(outcomes, w))
    flip_to_minus = m_minus @ np.linalg.inv(m_plus)
    flip_to_plus = m_plus @ np.linalg.inv(m_minus)
    for step, site in enumerate(_gray_flip_sequence(n)):
        if outcomes[site] == 1:
            w = apply_single_site(w, flip_to_minus, site)
            outcomes[site] = -1
        else:
            w = apply_single_site(w, flip_to_plus, site)
            outcomes[site] = 1
        if (step + 1) % 1024 == 0:
            w = fresh(outcomes)  # re-anchor: kills accumulated inverse-update drift
        results.append(_result_from_frame(outcomes, w))
    return results


def coherent_info_exact(outcomes, n) -> float:
    """Coherent information of the enumerated ensemble, in nats.

    n=1: Born average of the per-outcome entropy; n=2: -ln of the
    probability-squared-weighted purity; n=inf: entropy of the all-plus
    outcome (von Neumann form).
    """
    if n == 1:
        return float(sum(r.p * _rho_entropy(r) for r in outcomes))
    if n == 2:
        num = sum(r.p ** 2 * _rho_purity(r) for r in outcomes)
        den = sum(r.p ** 2 for r in outcomes)
        return float(-math.log(num / den))
    if math.isinf(n):
        for r in outcomes:
            if np.all(r.outcomes == 1):
                return _rho_entropy(r)
        raise ValueError("all-plus outcome missing from enumeration")
    raise ValueError(f"n={n} not in {{1, 2, inf}}")


def _rho_entropy(r: OutcomeResult) -> float:
    w = np.linalg.eigvalsh(r.rho_r())
    w = w[w > 1e-14]
    return float(-(w * np.log(w)).sum())


def _rho_purity(r: OutcomeResult) -> float:
    rho = r.rho_r()
    return float(np.trace(rho @ rho).real)


def hadamard_rotated(state: LogicalBellState) -> LogicalBellState:
    """Apply a Hadamard on every code qubit (maps the code onto its dual)."""
    h = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
    amp = state.amplitudes.copy()
    for q in range(state.n_qubits):
        amp = apply_single_site(amp, h, q)
    return LogicalBellState(
        d=state.d,
        lattice=state.lattice,
        amplitudes=amp,
        logical_x_support=state.logical_z_support,
        logical_z_support=state.logical_x_support,
    )

"""Vertex gates and truncated boundary-MPS contraction of the random network.

The network is a brickwork of 4-index gates on an effective chain of 2d+2
sites.  Horizontal-bond gates act on pairs (2c+1, 2c+2), vertical-bond gates
on (2c+2, 2c+3); the two end sites 0 and 2d+1 are dangling and carry the
boundary correlators.  The sweep starts and ends in a product of two-site
entangled pairs (|01> + |10> per replica copy) that encodes the free top and
bottom boundaries together with the glued rough boundaries.

Weights are kept in linear space; the boundary state is renormalized after
every row with the log of the norm accumulated separately, so unnormalized
outcome probabilities can be reconstructed at any code distance without
underflow.  Truncation drops density eigenvalues (normalized squared singular
values) at or below ``svd_cutoff`` and caps the bond dimension at ``chi_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr as _scipy_qr, svd as _scipy_svd

from .channel import Couplings
from .lattice import ORIENT_H, ORIENT_V, PlanarCodeLattice

_Z2 = np.array([[1.0, 0.0], [0.0, -1.0]])
_X2 = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class VertexGate:
    """4-index bond weight tensor, indexed (in1, in2, out1, out2)."""

    weights: np.ndarray
    orientation: str
    outcome: object  # +1, -1 or "summed"
    replica: float = 1

    @property
    def phys_dim(self) -> int:
        return self.weights.shape[0]

    def matrix(self) -> np.ndarray:
        """(out1 out2) x (in1 in2) matrix form used by the sweep."""
        p = self.phys_dim
        return self.weights.transpose(2, 3, 0, 1).reshape(p * p, p * p)


def _six_vertex(ap_diag: float, ap_flip: float, parallel: float) -> np.ndarray:
    g = np.zeros((2, 2, 2, 2))
    g[0, 1, 0, 1] = g[1, 0, 1, 0] = ap_diag
    g[0, 1, 1, 0] = g[1, 0, 0, 1] = ap_flip
    g[0, 0, 0, 0] = g[1, 1, 1, 1] = parallel
    return g


def gate_from_couplings(c: Couplings, s: int, orientation: str) -> VertexGate:
    """Outcome-resolved single-replica gate.

    Horizontal: antiparallel-diagonal cosh(J), antiparallel-flip s sinh(J),
    parallel s e^(-2K).  Vertical gates swap the flip and parallel weights
    (the quarter-turn dual).  Saturated K gives exactly zero parallel weight.
    """
    if s not in (1, -1):
        raise ValueError(f"outcome s={s} must be +-1")
    if c.j_saturated:
        raise ValueError("gate weights diverge at saturated J (t=pi/4, theta=0)")
    ch, sh = math.cosh(c.j), math.sinh(c.j)
    if orientation == ORIENT_H:
        w = _six_vertex(ch, s * sh, s * c.exp_minus_2k)
    elif orientation == ORIENT_V:
        w = _six_vertex(ch, s * c.exp_minus_2k, s * sh)
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    return VertexGate(weights=w, orientation=orientation, outcome=s, replica=1)


def summed_gate(c: Couplings, orientation: str) -> VertexGate:
    """Elementwise outcome sum of the single-replica gate (marginalized bond)."""
    w = (
        gate_from_couplings(c, 1, orientation).weights
        + gate_from_couplings(c, -1, orientation).weights
    )
    return VertexGate(weights=w, orientation=orientation, outcome="summed", replica=1)


def replica_gate(c: Couplings, n: float, orientation: str) -> VertexGate:
    """n=2: outcome-summed doubled gate (4-dim sites); n=inf: the s=+1 gate."""
    if n == 2:
        w = np.zeros((4, 4, 4, 4))
        for s in (1, -1):
            g = gate_from_couplings(c, s, orientation).weights
            w += np.einsum("ijkl,IJKL->iIjJkKlL", g, g).reshape(4, 4, 4, 4)
        return VertexGate(weights=w, orientation=orientation, outcome="summed", replica=2)
    if math.isinf(n):
        g = gate_from_couplings(c, 1, orientation)
        return VertexGate(weights=g.weights, orientation=orientation, outcome=1, replica=n)
    raise ValueError(f"replica_gate expects n in {{2, inf}}, got {n}")


def rotate_quarter(weights: np.ndarray) -> np.ndarray:
    """Quarter-turn of a gate in the network plane.

    One leg pair transposes with an arrow reversal:
    G'[i1, i2, o1, o2] = G[i1, ~o1, ~i2, o2] with ~x the per-copy spin flip.
    This maps every diagonal-slot gate onto its off-diagonal-slot partner and
    leaves the self-dual gate invariant.
    """
    p = weights.shape[0]
    flip = np.arange(p)[::-1]  # per-copy complement for p = 2 and 4
    g = weights[:, flip, :, :][:, :, flip, :]
    return np.ascontiguousarray(np.transpose(g, (0, 2, 1, 3)))


def _svd(mat: np.ndarray):
    try:
        return _scipy_svd(mat, full_matrices=False, lapack_driver="gesdd",
                          check_finite=False)
    except np.linalg.LinAlgError:
        return _scipy_svd(mat, full_matrices=False, lapack_driver="gesvd",
                          check_finite=False)


def _split_truncate(theta: np.ndarray, chi_max: int, cutoff: float, leave: str):
    """Truncated split theta ~ left @ right with the non-center side orthonormal.

    cutoff=0 takes the exact SVD path; otherwise a Gram eigendecomposition on
    the orthonormal side is used, which is noticeably faster at these sizes
    and accurate to the same order as the truncation itself.
    Returns (left, right, kept, discarded_weight).
    """
    if cutoff <= 0.0:
        u, sv, vh = _svd(theta)
        tot = float(np.dot(sv, sv))
        if tot <= 0.0 or not np.isfinite(tot):
            raise RuntimeError("vanishing or non-finite two-site block")
        keep = min(len(sv), chi_max)
        w = (sv * sv) / tot
        disc = float(np.sum(w[keep:]))
        u, sv, vh = u[:, :keep], sv[:keep], vh[:keep, :]
        if leave == "right":
            return u, sv[:, None] * vh, keep, disc
        return u * sv[None, :], vh, keep, disc
    if leave == "right":
        gram = theta @ theta.T
    else:
        gram = theta.T @ theta
    lam, vec = np.linalg.eigh(gram)
    lam = lam[::-1]
    vec = vec[:, ::-1]
    tot = float(np.sum(np.clip(lam, 0.0, None)))
    if tot <= 0.0 or not np.isfinite(tot):
        raise RuntimeError("vanishing or non-finite two-site block")
    w = np.clip(lam, 0.0, None) / tot
    keep = max(1, min(int(np.sum(w > cutoff)), chi_max))
    disc = float(np.sum(w[keep:]))
    basis = np.ascontiguousarray(vec[:, :keep])
    if leave == "right":
        return basis, basis.T @ theta, keep, disc
    return theta @ basis, basis.T, keep, disc


@dataclass
class BoundaryState:
    """Truncated boundary MPS plus its norm and truncation bookkeeping."""

    tensors: list  # (chi_l, p, chi_r) per chain site
    center: int = 0
    log_norm: float = 0.0
    cum_discarded_weight: float = 0.0
    chi_used: int = 1

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def phys_dim(self) -> int:
        return self.tensors[0].shape[1]

    @property
    def bond_dims(self):
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "BoundaryState":
        return BoundaryState(
            tensors=[t.copy() for t in self.tensors],
            center=self.center,
            log_norm=self.log_norm,
            cum_discarded_weight=self.cum_discarded_weight,
            chi_used=self.chi_used,
        )

    # -- gauge moves ---------------------------------------------------------

    def _shift_right(self):
        i = self.center
        a = self.tensors[i]
        cl, p, cr = a.shape
        q, r = _scipy_qr(a.reshape(cl * p, cr), mode="economic", check_finite=False)
        k = q.shape[1]
        self.tensors[i] = q.reshape(cl, p, k)
        nxt = self.tensors[i + 1]
        self.tensors[i + 1] = np.tensordot(r, nxt, axes=(1, 0))
        self.center = i + 1

    def _shift_left(self):
        i = self.center
        a = self.tensors[i]
        cl, p, cr = a.shape
        q, r = _scipy_qr(a.reshape(cl, p * cr).T, mode="economic", check_finite=False)
        k = q.shape[1]
        self.tensors[i] = q.T.reshape(k, p, cr)
        prv = self.tensors[i - 1]
        self.tensors[i - 1] = np.tensordot(prv, r.T, axes=(2, 0))
        self.center = i - 1

    def move_center(self, to: int):
        while self.center < to:
            self._shift_right()
        while self.center > to:
            self._shift_left()

    # -- gate application ----------------------------------------------------

    def apply_gate(self, a: int, gate_mat: np.ndarray, chi_max: int, cutoff: float,
                   leave: str):
        """Apply a two-site gate on (a, a+1); center must already sit on a or a+1."""
        if self.center not in (a, a + 1):
            self.move_center(a if leave == "right" else a + 1)
        ta, tb = self.tensors[a], self.tensors[a + 1]
        cl, p, _ = ta.shape
        _, _, cr = tb.shape
        theta = np.matmul(ta.reshape(cl * p, -1), tb.reshape(-1, p * cr))
        theta = theta.reshape(cl, p, p, cr).transpose(1, 2, 0, 3).reshape(p * p, cl * cr)
        theta = np.matmul(gate_mat, theta)
        theta = theta.reshape(p, p, cl, cr).transpose(2, 0, 1, 3).reshape(cl * p, p * cr)
        try:
            left_m, right_m, keep, disc = _split_truncate(theta, chi_max, cutoff, leave)
        except RuntimeError as exc:
            raise RuntimeError(f"{exc} at sites ({a},{a+1})") from None
        self.cum_discarded_weight += disc
        self.chi_used = max(self.chi_used, keep)
        self.tensors[a] = left_m.reshape(cl, p, keep)
        self.tensors[a + 1] = right_m.reshape(keep, p, cr)
        self.center = a + 1 if leave == "right" else a

    def apply_row(self, row_ops, chi_max: int, cutoff: float, row_label=None):
        """Apply one brickwork row (disjoint gates) and renormalize.

        ``row_ops``: list of (left_site, gate_matrix), any order.  The sweep
        runs from whichever chain end is closer to the current center so
        successive rows alternate direction for free.
        """
        if not row_ops:
            return
        ops = sorted(row_ops)
        n = self.n_sites
        go_right = self.center <= n - 1 - self.center
        if not go_right:
            ops = ops[::-1]
        for a, gm in ops:
            self.apply_gate(a, gm, chi_max, cutoff, leave="right" if go_right else "left")
        c = self.tensors[self.center]
        nrm = float(np.linalg.norm(c))
        if nrm <= 0.0 or not np.isfinite(nrm):
            raise RuntimeError(f"non-finite boundary norm after row {row_label}")
        self.tensors[self.center] = c / nrm
        self.log_norm += math.log(nrm)

    # -- measurements --------------------------------------------------------

    def overlap(self, bra_tensors, ops=None) -> float:
        """<bra| (prod of single-site ops) |self>, bra given as raw MPS tensors."""
        ops = ops or {}
        env = np.ones((1, 1))
        for i, (k, b) in enumerate(zip(self.tensors, bra_tensors)):
            kk = k
            if i in ops:
                kk = np.einsum("ab,lbr->lar", ops[i], k)
            # env (bk, bb) ; kk (bk, p, k') ; b (bb, p, b')
            t = np.tensordot(env, kk, axes=(0, 0))  # (bb, p, k')
            env = np.tensordot(b, t, axes=([0, 1], [0, 1]))  # (b', k') -> transpose
            env = env.T
        return float(env[0, 0])

    def cut_entropies(self):
        """Von Neumann entropy of every internal cut; cut l is left of site l."""
        work = self.copy()
        work.move_center(0)
        out = []
        for i in range(work.n_sites - 1):
            a = work.tensors[i]
            cl, p, cr = a.shape
            m = a.reshape(cl * p, cr)
            gram = m.T @ m if cr <= cl * p else m @ m.T
            lam = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
            tot = float(lam.sum())
            w = lam / tot
            w = w[w > 1e-300]
            out.append(float(-(w * np.log(w)).sum()))
            work._shift_right()
        return out


def bell_boundary_tensors(n_pairs: int, p: int):
    """Unnormalized product of pair states sum_a |a, conj(a)> on (2j, 2j+1)."""
    tensors = []
    for _ in range(n_pairs):
        a = np.zeros((1, p, p))
        for x in range(p):
            a[0, x, x] = 1.0
        b = np.zeros((p, p, 1))
        for x in range(p):
            b[x, p - 1 - x, 0] = 1.0
        tensors.append(a)
        tensors.append(b)
    return tensors


def bell_boundary_state(n_pairs: int, p: int) -> BoundaryState:
    """Normalized boundary MPS with the exact pair-product norm in log_norm."""
    tensors = bell_boundary_tensors(n_pairs, p)
    bs = BoundaryState(tensors=tensors, center=len(tensors) - 1, log_norm=0.0)
    bs.move_center(0)  # right-canonicalize; the full norm lands on site 0
    nrm = float(np.linalg.norm(bs.tensors[0]))
    bs.tensors[0] = bs.tensors[0] / nrm
    bs.log_norm = math.log(nrm)
    return bs


def mps_add(t1, t2, c1: float = 1.0, c2: float = 1.0):
    """Direct-sum addition c1*|t1> + c2*|t2> of two raw MPS tensor lists."""
    n = len(t1)
    out = []
    for i, (a, b) in enumerate(zip(t1, t2)):
        la, pa, ra = a.shape
        lb, _, rb = b.shape
        aa = c1 * a if i == 0 else a
        bb = c2 * b if i == 0 else b
        if i == 0:
            t = np.concatenate([aa, bb], axis=2)
        elif i == n - 1:
            t = np.concatenate([aa, bb], axis=0)
        else:
            t = np.zeros((la + lb, pa, ra + rb))
            t[:la, :, :ra] = aa
            t[la:, :, ra:] = bb
        out.append(t)
    return out


def outcome_measure_boundary(n_pairs: int) -> list:
    """Closing boundary whose contractions are proportional to P(s).

    P(s) carries the factor (1 - Z_0 Z_(2d+1))/2 relative to the bare network
    value, so the measure the ancestral sampler must condition on uses the
    boundary (1 - Z at both dangling sites)/2 folded into the pair product.
    """
    plain = bell_boundary_tensors(n_pairs, 2)
    flipped = [t.copy() for t in plain]
    z = np.array([[1.0, 0.0], [0.0, -1.0]])
    flipped[0] = np.einsum("ab,lbr->lar", z, flipped[0])
    flipped[-1] = np.einsum("ab,lbr->lar", z, flipped[-1])
    return mps_add(plain, flipped, 0.5, -0.5)


@dataclass(frozen=True)
class Correlators:
    """Boundary correlators and the log of the unnormalized contraction value."""

    values: dict
    log_abs: float
    sign: float

    def __getitem__(self, key):
        return self.values[key]


def _dangling_ops(p: int, kind: str):
    """Operator pairs inserted at the two dangling sites."""
    if p == 2:
        table = {"czz": (_Z2, _Z2), "cxx": (_X2, _X2)}
    else:
        i2 = np.eye(2)
        table = {
            "czz1": (np.kron(_Z2, i2), np.kron(_Z2, i2)),
            "czz2": (np.kron(i2, _Z2), np.kron(i2, _Z2)),
            "czz12": (np.kron(_Z2, _Z2), np.kron(_Z2, _Z2)),
            "cxx12": (np.kron(_X2, _X2), np.kron(_X2, _X2)),
        }
    return table[kind]


def correlator_names(p: int):
    return ("czz", "cxx") if p == 2 else ("czz1", "czz2", "czz12", "cxx12")


def contract(lat: PlanarCodeLattice, gates, chi_max: int = 256,
             svd_cutoff: float = 1e-10):
    """Row-by-row boundary-MPS contraction of the full network.

    ``gates`` maps bond id -> VertexGate (or raw 4-index array); one gate per
    bond, outcome-resolved for Born sampling or outcome-summed for the replica
    networks.  Returns (Correlators, BoundaryState); the correlator dict holds
    <Z_0 Z_(2d+1)> and <X_0 X_(2d+1)> (per-copy variants for doubled gates).
    """
    mats = {}
    p = None
    for q in range(lat.n_qubits):
        g = gates[q]
        w = g.weights if isinstance(g, VertexGate) else np.asarray(g)
        pq = w.shape[0]
        if p is None:
            p = pq
        elif pq != p:
            raise ValueError("all gates must share one physical dimension")
        mats[q] = w.transpose(2, 3, 0, 1).reshape(pq * pq, pq * pq)
    bs = bell_boundary_state(lat.d + 1, p)
    for r, row in enumerate(lat.contraction_rows):
        row_ops = [(lat.chain_positions[q], mats[q]) for q, _ in row]
        bs.apply_row(row_ops, chi_max, svd_cutoff, row_label=r)
    bra = bell_boundary_tensors(lat.d + 1, p)
    last = bs.n_sites - 1
    v0 = bs.overlap(bra)
    if v0 == 0.0:
        raise RuntimeError("contraction closed to exactly zero")
    vals = {}
    for name in correlator_names(p):
        o0, o1 = _dangling_ops(p, name)
        vals[name] = bs.overlap(bra, {0: o0, last: o1}) / v0
    corr = Correlators(values=vals, log_abs=bs.log_norm + math.log(abs(v0)),
                       sign=math.copysign(1.0, v0))
    return corr, bs


def log_weight_normalization(c: Couplings, n_qubits: int) -> float:
    """ln of the constant relating the contraction value to P_plus_plus:
    P_pp = Ztilde / (2 (2 cosh J)^N)."""
    return math.log(2.0) + n_qubits * (math.log(2.0) + math.log(math.cosh(c.j)))


def log_p_outcome(corr: Correlators, c: Couplings, n_qubits: int) -> float:
    """ln P(s) from a single-replica outcome-resolved contraction."""
    czz = corr["czz"]
    return (
        corr.log_abs
        - log_weight_normalization(c, n_qubits)
        + math.log(max((1.0 - czz) / 2.0, 1e-300))
    )


def build_gates(lat: PlanarCodeLattice, c: Couplings, outcomes=None, n_replica: float = 1):
    """Gate table for a whole lattice.

    For n=1, ``outcomes`` gives s per bond (entries may be +1/-1/0, 0 meaning
    outcome-summed).  For n=2/inf the network is outcome-free.
    """
    table = {}
    if n_replica == 1:
        cache = {}
        for q in range(lat.n_qubits):
            o = lat.orientation(q)
            s = int(outcomes[q]) if outcomes is not None else 0
            key = (o, s)
            if key not in cache:
                cache[key] = summed_gate(c, o) if s == 0 else gate_from_couplings(c, s, o)
            table[q] = cache[key]
    else:
        cache = {o: replica_gate(c, n_replica, o) for o in (ORIENT_H, ORIENT_V)}
        for q in range(lat.n_qubits):
            table[q] = cache[lat.orientation(q)]
    return table


# -- steady-state boundary entropy scan --------------------------------------


def reduced_chain_rows(d: int):
    """One period of the bulk brickwork on the reduced 2d-site chain.

    Dangling sites are dropped; diagonal-slot gates act on (0,1), (2,3), ...,
    off-diagonal ones on (1,2), (3,4), ...  Returns (h_sites, v_sites).
    """
    h_sites = [2 * c for c in range(d)]
    v_sites = [2 * c + 1 for c in range(d - 1)]
    return h_sites, v_sites


def steady_boundary_state(d: int, gate_h: VertexGate, gate_v: VertexGate,
                          chi_max: int = 1024, svd_cutoff: float = 1e-10,
                          n_rows: int = None, drift_tol: float = 1e-4):
    """Evolve the reduced 2d-site chain to its steady boundary state.

    Alternates diagonal/off-diagonal gate rows for ``n_rows`` (default 4d)
    rows starting from the free product state.  Returns (BoundaryState,
    entropy drift between the last two same-parity rows, converged flag).
    """
    if n_rows is None:
        n_rows = 4 * d
    p = gate_h.phys_dim
    gh, gv = gate_h.matrix(), gate_v.matrix()
    h_sites, v_sites = reduced_chain_rows(d)
    tensors = [np.full((1, p, 1), 1.0 / math.sqrt(p)) for _ in range(2 * d)]
    bs = BoundaryState(tensors=tensors, center=0)
    prev_profile = None
    drift = math.inf
    for r in range(n_rows):
        if r % 2 == 0:
            bs.apply_row([(a, gh) for a in h_sites], chi_max, svd_cutoff, row_label=r)
        else:
            bs.apply_row([(a, gv) for a in v_sites], chi_max, svd_cutoff, row_label=r)
        if r % 2 == 1 or r == n_rows - 1:
            profile = np.array(bs.cut_entropies())
            if prev_profile is not None:
                drift = float(np.max(np.abs(profile - prev_profile)))
            prev_profile = profile
    return bs, drift, drift <= drift_tol


def boundary_entropy_profile(bs: BoundaryState, drop_dangling: bool = True):
    """Entropies at the even cuts through the off-diagonal gates.

    For a reduced-chain state (``drop_dangling=True``, 2d sites) the cuts sit
    at l = 2, 4, ..., 2d-2 with l counting sites left of the cut.  For a full
    2d+2-site state the same physical cuts are used with the dangling end
    sites excluded from the count.
    """
    ent = bs.cut_entropies()
    n = bs.n_sites
    out = []
    if drop_dangling and n % 2 == 0:
        two_d = n
        for l in range(2, two_d - 1, 2):
            out.append((l, ent[l - 1]))
    else:
        two_d = n - 2
        for l in range(2, two_d - 1, 2):
            out.append((l, ent[l]))
    return out

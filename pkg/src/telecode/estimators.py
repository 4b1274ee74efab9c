"""From contraction outputs to physics.

Per-sample polarization vectors and entropies, Born-averaged and Renyi
coherent information, the active decoder's logical channel, the
outcome-record Shannon diagnostic, and the passive-protocol comparison curve.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, asdict

import numpy as np

from .channel import Couplings, ProtocolParams, couplings_from
from .lattice import PlanarCodeLattice, build_planar_code
from .sampler import AncestralSampler, OutcomeConfig, sample_nishimori
from .tn import Correlators, build_gates, contract, log_p_outcome

LN2 = math.log(2.0)

#: |1 - czz| below this counts as a diverging denominator (logical collapse)
_COLLAPSE_TOL = 1e-12


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * math.log(p) - (1.0 - p) * math.log(1.0 - p))


def kappa_from_correlators(czz: float, cxx: float):
    """Polarization components from the two dangling-site correlators.

    kappa_x = (1 + czz)/(1 - czz), kappa_z = 2 cxx / (1 - czz); a vanishing
    denominator signals full condensation and saturates kappa_x to 1.
    """
    den = 1.0 - czz
    if abs(den) < _COLLAPSE_TOL:
        return 1.0, 0.0
    return (1.0 + czz) / den, 2.0 * cxx / den


def entropy_from_kappa(kx: float, kz: float) -> float:
    k = min(math.hypot(kx, kz), 1.0)
    return binary_entropy((1.0 + k) / 2.0)


@dataclass(frozen=True)
class SampleRecord:
    t_over_pi: float
    theta_over_pi: float
    d: int
    n_replica: float
    seed_path: tuple
    kappa_x: float
    kappa_z: float
    entropy: float
    log_p: float
    chi_used: int
    discarded_weight: float
    wall_time: float

    def to_json_dict(self) -> dict:
        out = asdict(self)
        out["seed_path"] = list(self.seed_path)
        out["n_replica"] = "inf" if math.isinf(self.n_replica) else int(self.n_replica)
        return out

    @staticmethod
    def from_json_dict(d: dict) -> "SampleRecord":
        n = d["n_replica"]
        return SampleRecord(
            t_over_pi=float(d["t_over_pi"]),
            theta_over_pi=float(d["theta_over_pi"]),
            d=int(d["d"]),
            n_replica=math.inf if n == "inf" else float(n),
            seed_path=tuple(d["seed_path"]),
            kappa_x=float(d["kappa_x"]),
            kappa_z=float(d["kappa_z"]),
            entropy=float(d["entropy"]),
            log_p=float(d["log_p"]),
            chi_used=int(d["chi_used"]),
            discarded_weight=float(d["discarded_weight"]),
            wall_time=float(d["wall_time"]),
        )


def record_from_outcome(lat: PlanarCodeLattice, params: ProtocolParams,
                        outcome: OutcomeConfig, couplings: Couplings = None,
                        gate_cache: dict = None) -> SampleRecord:
    """Contract one outcome-resolved network into a SampleRecord."""
    t0 = time.perf_counter()
    c = couplings or couplings_from(params.t, params.theta)
    gates = _cached_gates(lat, c, outcome.values, gate_cache)
    corr, bs = contract(lat, gates, params.chi_max, params.svd_cutoff)
    kx, kz = kappa_from_correlators(corr["czz"], corr["cxx"])
    return SampleRecord(
        t_over_pi=params.t_over_pi,
        theta_over_pi=params.theta_over_pi,
        d=params.d,
        n_replica=1,
        seed_path=outcome.seed_path,
        kappa_x=kx,
        kappa_z=kz,
        entropy=entropy_from_kappa(kx, kz),
        log_p=log_p_outcome(corr, c, lat.n_qubits),
        chi_used=bs.chi_used,
        discarded_weight=bs.cum_discarded_weight,
        wall_time=time.perf_counter() - t0,
    )


def _cached_gates(lat, c, values, cache):
    if cache is None:
        return build_gates(lat, c, outcomes=values)
    if not cache:
        from .tn import gate_from_couplings

        for o in ("horizontal", "vertical"):
            for s in (1, -1):
                cache[(o, s)] = gate_from_couplings(c, s, o)
    return {q: cache[(lat.orientation(q), int(values[q]))] for q in range(lat.n_qubits)}


def record_from_ancestral(sampler: AncestralSampler, params: ProtocolParams,
                          seed: int, sample_index: int) -> SampleRecord:
    outcome, st = sampler.sample(seed, sample_index)
    kx, kz = kappa_from_correlators(st.czz, st.cxx)
    return SampleRecord(
        t_over_pi=params.t_over_pi,
        theta_over_pi=params.theta_over_pi,
        d=params.d,
        n_replica=1,
        seed_path=outcome.seed_path,
        kappa_x=kx,
        kappa_z=kz,
        entropy=entropy_from_kappa(kx, kz),
        log_p=st.log_p,
        chi_used=st.chi_used,
        discarded_weight=st.discarded_weight,
        wall_time=st.wall_time,
    )


def jackknife_mean(values) -> tuple:
    """(mean, jackknife standard error) of a 1D sample."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 2:
        return float(x.mean()) if n else math.nan, math.nan
    mean = float(x.mean())
    loo = (x.sum() - x) / (n - 1)
    se = math.sqrt((n - 1) / n * float(((loo - loo.mean()) ** 2).sum()))
    return mean, se


def _check_same_point(records):
    keys = {(r.t_over_pi, r.theta_over_pi, r.d, r.n_replica) for r in records}
    if len(keys) != 1:
        raise ValueError(f"records mix parameter points: {sorted(keys)}")


def coherent_info_born(records) -> tuple:
    """Born-averaged coherent information (nats) with jackknife error."""
    if len(records) < 2:
        raise ValueError("need at least 2 records")
    _check_same_point(records)
    return jackknife_mean([r.entropy for r in records])


@dataclass(frozen=True)
class Renyi2Result:
    i_c2: float
    kappa_sq: float
    correlators: dict


def renyi2_from_replica(lat: PlanarCodeLattice, params: ProtocolParams) -> Renyi2Result:
    """Second Renyi coherent information by one deterministic doubled contraction.

    I_c2 = ln 2 - ln(1 + [kappa^2]) where the replica-averaged kappa^2 comes
    from the three doubled boundary correlators.
    """
    if params.phi_over_pi != 0.0:
        raise ValueError("replica contraction requires phi=0")
    c = couplings_from(params.t, params.theta)
    gates = build_gates(lat, c, n_replica=2)
    corr, _ = contract(lat, gates, params.chi_max, params.svd_cutoff)
    z1, z2, z12, x12 = corr["czz1"], corr["czz2"], corr["czz12"], corr["cxx12"]
    k2 = (1.0 + z1 + z2 + z12 + 4.0 * x12) / (1.0 - z1 - z2 + z12)
    return Renyi2Result(i_c2=LN2 - math.log1p(k2), kappa_sq=k2, correlators=dict(corr.values))


def coherent_info_forced_plus(lat: PlanarCodeLattice, params: ProtocolParams) -> float:
    """Post-selected (all-plus) coherent information, von Neumann form."""
    c = couplings_from(params.t, params.theta)
    gates = build_gates(lat, c, n_replica=math.inf)
    corr, _ = contract(lat, gates, params.chi_max, params.svd_cutoff)
    kx, kz = kappa_from_correlators(corr["czz"], corr["cxx"])
    return entropy_from_kappa(kx, kz)


@dataclass
class DecodeResult:
    """Reconstructed reference state and the residual logical channel."""

    kappa_x: float
    kappa_z: float
    z_flip: bool  # the classical-frame correction that makes kappa_z >= 0
    status: str  # "ok" or "logical_collapse"

    @property
    def corrected_kappa_z(self) -> float:
        return abs(self.kappa_z)

    def rho_r(self) -> np.ndarray:
        """Corrected reference-qubit density matrix (computational basis)."""
        kx, kz = self.kappa_x, self.corrected_kappa_z
        return 0.5 * np.array([[1 + kz, kx], [kx, 1 - kz]])

    def sqrt_rho(self) -> np.ndarray:
        w, v = np.linalg.eigh(self.rho_r())
        return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T

    def apply_channel(self, rho_l: np.ndarray) -> np.ndarray:
        """Residual logical channel rho -> sqrt(rho_R) rho sqrt(rho_R), normalized."""
        s = self.sqrt_rho()
        out = s @ rho_l @ s
        tr = np.trace(out).real
        if tr <= 0:
            raise ValueError("channel annihilated the input state")
        return out / tr

    def bell_fidelity(self) -> float:
        """Overlap of the teleported logical Bell pair with the ideal one."""
        k = min(math.hypot(self.kappa_x, self.kappa_z), 1.0)
        return 0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - k * k)))


def decode_from_kappa(kx: float, kz: float) -> DecodeResult:
    # teleportation failure: the reference qubit is pinned to a classical bit
    collapsed = abs(kx) >= 1.0 - 1e-9 or math.hypot(kx, kz) >= 1.0 - 1e-9
    return DecodeResult(kappa_x=kx, kappa_z=kz, z_flip=kz < 0.0,
                        status="logical_collapse" if collapsed else "ok")


def decode_active(lat: PlanarCodeLattice, params: ProtocolParams,
                  outcome: OutcomeConfig) -> DecodeResult:
    """Run the network for one outcome and return the decoder's output.

    The sign of kappa_z picks the logical-frame flip; the kappa_x magnitude is
    uncorrectable shrinkage and is reported, not corrected.
    """
    c = couplings_from(params.t, params.theta)
    gates = build_gates(lat, c, outcomes=outcome.values)
    corr, _ = contract(lat, gates, params.chi_max, params.svd_cutoff)
    kx, kz = kappa_from_correlators(corr["czz"], corr["cxx"])
    return decode_from_kappa(kx, kz)


@dataclass(frozen=True)
class AliceShannonResult:
    i_cz: float
    i_cz_se: float
    reconstructed: float
    reconstructed_se: float


def alice_shannon(records, theta_over_pi: float) -> AliceShannonResult:
    """Shannon diagnostic of the outcome record against the reference bit.

    Per sample the conditional entropy of the reference-bit readout is
    H2((1 +|kappa_z|)/2); its Born mean is the measured I_c^z.  At theta=0
    this equals the coherent information directly.  On the self-dual angle
    the reconstruction rescales kappa_z by sqrt(2) before re-evaluating the
    entropy (exact only up to finite-size corrections).
    """
    if theta_over_pi not in (0.0, 0.25):
        raise ValueError("Shannon diagnostic is defined at theta/pi in {0, 1/4} only")
    _check_same_point(records)
    s_z = [binary_entropy((1.0 + min(abs(r.kappa_z), 1.0)) / 2.0) for r in records]
    icz, icz_se = jackknife_mean(s_z)
    if theta_over_pi == 0.0:
        return AliceShannonResult(icz, icz_se, icz, icz_se)
    s_rec = [
        binary_entropy((1.0 + min(math.sqrt(2.0) * abs(r.kappa_z), 1.0)) / 2.0)
        for r in records
    ]
    rec, rec_se = jackknife_mean(s_rec)
    return AliceShannonResult(icz, icz_se, rec, rec_se)


def passive_sample_value(record: SampleRecord) -> float:
    """Per-sample passive coherent-information contribution ln2 - S."""
    return LN2 - record.entropy


def passive_threshold_curve(d_list, t_over_pi_grid, n_samples: int, seed: int,
                            chi_max: int = 256, svd_cutoff: float = 1e-10,
                            progress=None):
    """Passive-protocol I_c(t, d) on the given grid, at theta=0.

    Without the outcome record the residual noise is an incoherent flip
    channel with probability sin^2(t); on the self-consistent disorder line
    this is the reflected-parameter ensemble of the active protocol on the
    dual geometry, so each point reuses the active machinery at t' = pi/4 - t
    and maps the per-sample entropy S to ln2 - S.
    """
    from .sampler import derive_point_seed

    rows = []
    for d in d_list:
        lat = build_planar_code(d)
        for ti, t_over_pi in enumerate(t_over_pi_grid):
            t_act = 0.25 - t_over_pi
            if t_act >= 0.25 - 1e-12:
                # noiseless endpoint: flip probability 0, code intact
                rows.append({"d": d, "t_over_pi": t_over_pi, "mean": LN2,
                             "se": 0.0, "n_samples": n_samples})
                continue
            params = ProtocolParams(t_over_pi=t_act, theta_over_pi=0.0, d=d,
                                    chi_max=chi_max, svd_cutoff=svd_cutoff, seed=seed)
            c = couplings_from(params.t, 0.0)
            pseed = derive_point_seed(seed, d, ti, 0)
            cache = {}
            vals = []
            for k in range(n_samples):
                oc = sample_nishimori(lat, params.t, 0.0, pseed, k)
                rec = record_from_outcome(lat, params, oc, couplings=c, gate_cache=cache)
                vals.append(LN2 - rec.entropy)
            mean, se = jackknife_mean(vals)
            rows.append({"d": d, "t_over_pi": t_over_pi, "mean": mean, "se": se,
                         "n_samples": n_samples})
            if progress:
                progress(rows[-1])
    return rows

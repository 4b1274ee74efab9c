"""Measurement-outcome sampling with correct Born statistics.

Two routes: the iid bond-sign sampler valid on the gauge-symmetric axes
(theta = 0 or pi/2), and an exact ancestral sampler for general theta that
fixes one bond at a time in contraction order, conditioning each marginal on
the resolved prefix while summing the unresolved suffix gate-locally.

Randomness is counter-based: every sample owns a Philox stream keyed by
(global seed, sample index) and site i always consumes the i-th variate of
that stream, so results are reproducible under any parallel schedule.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .channel import couplings_from, disorder_prob
from .lattice import PlanarCodeLattice
from .tn import (
    BoundaryState,
    bell_boundary_state,
    bell_boundary_tensors,
    gate_from_couplings,
    outcome_measure_boundary,
    summed_gate,
)

_MARGINAL_EPS = 1e-8


@dataclass(frozen=True)
class OutcomeConfig:
    d: int
    values: np.ndarray  # +-1 per qubit site
    provenance: str  # nishimori_iid | ancestral | forced_plus
    seed_path: tuple  # (global seed, sample index)


def sample_uniforms(seed: int, sample_index: int, n: int) -> np.ndarray:
    """The n site-variates of the (seed, sample) Philox stream."""
    ss = np.random.SeedSequence((int(seed), int(sample_index)))
    gen = np.random.Generator(np.random.Philox(ss))
    return gen.random(n)


def derive_point_seed(seed: int, d: int, t_idx: int, theta_idx: int) -> int:
    """Stable per-grid-point seed; grid edits leave other points untouched."""
    ss = np.random.SeedSequence((int(seed), int(d), int(t_idx), int(theta_idx)))
    return int(ss.generate_state(1, np.uint64)[0])


def sample_nishimori(lat: PlanarCodeLattice, t: float, theta: float, seed: int,
                     sample_index: int = 0) -> OutcomeConfig:
    """iid bond signs, flipped with the active disorder probability.

    Valid only on the gauge-symmetric axes theta in {0, pi/2}; elsewhere the
    Born distribution of the signs is correlated and this sampler refuses.
    """
    if not (abs(theta) < 1e-12 or abs(theta - math.pi / 2) < 1e-12):
        raise ValueError(f"nishimori sampler requires theta in {{0, pi/2}}, got {theta}")
    p = disorder_prob(t, "active")
    u = sample_uniforms(seed, sample_index, lat.n_qubits)
    values = np.where(u < p, -1, 1).astype(np.int8)
    return OutcomeConfig(d=lat.d, values=values, provenance="nishimori_iid",
                         seed_path=(seed, sample_index))


def forced_plus(lat: PlanarCodeLattice, seed: int = 0) -> OutcomeConfig:
    return OutcomeConfig(d=lat.d, values=np.ones(lat.n_qubits, dtype=np.int8),
                         provenance="forced_plus", seed_path=(seed, 0))


def frustration_pattern(lat: PlanarCodeLattice, outcome: OutcomeConfig) -> np.ndarray:
    """Bond-sign products around the faces; the gauge-invariant content of s."""
    return np.array([int(np.prod(outcome.values[list(f)])) for f in lat.plaquettes()],
                    dtype=np.int8)


@dataclass
class SampleStats:
    log_p: float
    czz: float
    cxx: float
    chi_used: int
    discarded_weight: float
    wall_time: float


def _site_transfer(env, top, bot):
    # env (a, b); top (a, p, a'); bot (b, p, b') -> (a', b')
    t = np.tensordot(env, top, axes=(0, 0))  # (b, p, a')
    return np.tensordot(bot, t, axes=([0, 1], [0, 1])).T  # (a', b')


def _pair_transfer(env, top1, top2, bot1, bot2, gate_mat, p):
    # absorb a gated pair from the left: env (a, b) -> (a'', b'')
    t = np.tensordot(env, top1, axes=(0, 0))  # (b, i1, a')
    t = np.tensordot(t, top2, axes=(2, 0))  # (b, i1, i2, a'')
    b_, a2 = t.shape[0], t.shape[3]
    t = t.transpose(1, 2, 0, 3).reshape(p * p, b_ * a2)
    t = np.tensordot(gate_mat, t, axes=(1, 0)).reshape(p, p, b_, a2)  # (o1, o2, b, a'')
    t = np.tensordot(bot1, t, axes=([0, 1], [2, 0]))  # (b', o2, a'')
    return np.tensordot(bot2, t, axes=([0, 1], [0, 1])).T  # (a'', b'')


class AncestralSampler:
    """Exact sequential sampler for one (lattice, t, theta) point.

    The environments below every row are precomputed once with outcome-summed
    gates (they do not depend on the sample) and shared across samples; a
    sample then sweeps top-down, fixing each bond from its conditional
    marginal and evolving the resolved boundary state behind it.
    """

    def __init__(self, lat: PlanarCodeLattice, t: float, theta: float,
                 chi_max: int = 256, svd_cutoff: float = 1e-10,
                 debug: bool = False):
        self.lat = lat
        self.t = t
        self.theta = theta
        self.chi_max = chi_max
        self.svd_cutoff = svd_cutoff
        self.debug = debug
        self.couplings = couplings_from(t, theta)
        c = self.couplings
        self._mat = {}
        for o in ("horizontal", "vertical"):
            self._mat[(o, 1)] = gate_from_couplings(c, 1, o).matrix()
            self._mat[(o, -1)] = gate_from_couplings(c, -1, o).matrix()
            self._mat[(o, 0)] = summed_gate(c, o).matrix()
        self._bottom_envs = self._build_bottom_envs()

    def _build_bottom_envs(self):
        # the closing boundary carries the (1 - ZZ)/2 dangler factor so every
        # conditional targets the Born measure P(s), not the bare network value
        lat = self.lat
        rows = lat.contraction_rows
        env = BoundaryState(tensors=outcome_measure_boundary(lat.d + 1))
        env.center = env.n_sites - 1
        env.move_center(0)
        nrm = float(np.linalg.norm(env.tensors[0]))
        env.tensors[0] /= nrm
        envs = [None] * len(rows)
        envs[len(rows) - 1] = [t.copy() for t in env.tensors]
        for r in range(len(rows) - 1, 0, -1):
            row_ops = [(lat.chain_positions[q], self._mat[(o, 0)]) for q, o in rows[r]]
            env.apply_row(row_ops, self.chi_max, self.svd_cutoff, row_label=("env", r))
            envs[r - 1] = [t.copy() for t in env.tensors]
        return envs

    def _row_marginals(self, top: BoundaryState, bot_tensors, row, uniforms, values,
                       log_p: float) -> float:
        """Fix all outcomes of one row in place; returns updated log_p."""
        lat = self.lat
        n_sites = top.n_sites
        entries = sorted(((lat.chain_positions[q], q, o) for q, o in row))
        # right environments with the suffix still outcome-summed
        right = {}
        env = np.ones((1, 1))
        k = len(entries) - 1
        i = n_sites - 1
        while i >= 0:
            if k >= 0 and i == entries[k][0] + 1:
                a, q, o = entries[k]
                right[k] = env
                env = _pair_transfer_right(env, top.tensors[a], top.tensors[a + 1],
                                           bot_tensors[a], bot_tensors[a + 1],
                                           self._mat[(o, 0)])
                k -= 1
                i -= 2
            else:
                env = _site_transfer_right(env, top.tensors[i], bot_tensors[i])
                i -= 1
            nrm = np.linalg.norm(env)
            if nrm > 0:
                env = env / nrm
        # left sweep, fixing outcomes one gate at a time
        left = np.ones((1, 1))
        i = 0
        for k, (a, q, o) in enumerate(entries):
            while i < a:
                left = _site_transfer(left, top.tensors[i], bot_tensors[i])
                i += 1
            vals = {}
            for s in (1, -1):
                e = _pair_transfer(left, top.tensors[a], top.tensors[a + 1],
                                   bot_tensors[a], bot_tensors[a + 1],
                                   self._mat[(o, s)], top.phys_dim)
                vals[s] = float(np.tensordot(e, right[k], axes=([0, 1], [0, 1])))
            tot = vals[1] + vals[-1]
            if tot == 0.0 or not np.isfinite(tot):
                raise RuntimeError(f"degenerate conditional at bond {q}")
            if self.debug:
                # gate-local marginalization: the two branches must re-sum to
                # the outcome-summed closure
                e = _pair_transfer(left, top.tensors[a], top.tensors[a + 1],
                                   bot_tensors[a], bot_tensors[a + 1],
                                   self._mat[(o, 0)], top.phys_dim)
                v_sum = float(np.tensordot(e, right[k], axes=([0, 1], [0, 1])))
                if abs(tot - v_sum) > 1e-8 * max(abs(v_sum), 1e-30):
                    raise RuntimeError(
                        f"marginal consistency violated at bond {q}: "
                        f"{tot} vs {v_sum}")
            p_plus = vals[1] / tot
            if p_plus < -_MARGINAL_EPS or p_plus > 1.0 + _MARGINAL_EPS:
                raise RuntimeError(f"conditional marginal {p_plus} outside [0,1] at bond {q}")
            p_plus = min(max(p_plus, 0.0), 1.0)
            s = 1 if uniforms[q] < p_plus else -1
            values[q] = s
            log_p += math.log(max(p_plus if s == 1 else 1.0 - p_plus, 1e-300))
            left = _pair_transfer(left, top.tensors[a], top.tensors[a + 1],
                                  bot_tensors[a], bot_tensors[a + 1],
                                  self._mat[(o, s)], top.phys_dim)
            # renormalize the running environment; only ratios matter
            nrm = np.linalg.norm(left)
            if nrm > 0:
                left /= nrm
            i = a + 2
        return log_p

    def sample(self, seed: int, sample_index: int):
        t0 = time.perf_counter()
        lat = self.lat
        uniforms = sample_uniforms(seed, sample_index, lat.n_qubits)
        values = np.zeros(lat.n_qubits, dtype=np.int8)
        top = bell_boundary_state(lat.d + 1, 2)
        log_p = 0.0
        for r, row in enumerate(lat.contraction_rows):
            log_p = self._row_marginals(top, self._bottom_envs[r], row, uniforms,
                                        values, log_p)
            row_ops = [(lat.chain_positions[q], self._mat[(o, int(values[q]))])
                       for q, o in row]
            top.apply_row(row_ops, self.chi_max, self.svd_cutoff, row_label=r)
        outcome = OutcomeConfig(d=lat.d, values=values, provenance="ancestral",
                                seed_path=(seed, sample_index))
        corr = _close_correlators(top, lat.d)
        stats = SampleStats(
            log_p=log_p,
            czz=corr["czz"],
            cxx=corr["cxx"],
            chi_used=top.chi_used,
            discarded_weight=top.cum_discarded_weight,
            wall_time=time.perf_counter() - t0,
        )
        return outcome, stats


def _site_transfer_right(env, top, bot):
    # env (a', b'); top (a, p, a'); bot (b, p, b') -> (a, b)
    t = np.tensordot(top, env, axes=(2, 0))  # (a, p, b')
    return np.tensordot(t, bot, axes=([1, 2], [1, 2]))  # (a, b)


def _pair_transfer_right(env, top1, top2, bot1, bot2, gate_mat):
    p = top1.shape[1]
    t = np.tensordot(top2, env, axes=(2, 0))  # (a', i2, b'')
    t = np.tensordot(top1, t, axes=(2, 0))  # (a, i1, i2, b'')
    a_, b2 = t.shape[0], t.shape[3]
    t = t.transpose(1, 2, 0, 3).reshape(p * p, a_ * b2)
    t = np.tensordot(gate_mat, t, axes=(1, 0)).reshape(p, p, a_, b2)  # (o1, o2, a, b'')
    t = np.tensordot(t, bot2, axes=([1, 3], [1, 2]))  # (o1, a, b')
    return np.tensordot(t, bot1, axes=([0, 2], [1, 2]))  # (a, b)


def _close_correlators(top: BoundaryState, d: int):
    bra = bell_boundary_tensors(d + 1, top.phys_dim)
    last = top.n_sites - 1
    z = np.array([[1.0, 0.0], [0.0, -1.0]])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    v0 = top.overlap(bra)
    if v0 == 0.0:
        raise RuntimeError("resolved contraction closed to zero")
    return {
        "czz": top.overlap(bra, {0: z, last: z}) / v0,
        "cxx": top.overlap(bra, {0: x, last: x}) / v0,
        "log_abs": top.log_norm + math.log(abs(v0)),
    }


def sample_ancestral(lat: PlanarCodeLattice, t: float, theta: float,
                     chi_max: int, svd_cutoff: float, seed: int,
                     sample_index: int = 0):
    """One-shot ancestral draw; for batches reuse an AncestralSampler."""
    return AncestralSampler(lat, t, theta, chi_max, svd_cutoff).sample(seed, sample_index)

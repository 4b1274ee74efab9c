import math

import numpy as np
import pytest

from telecode.oracle import (
    coherent_info_exact,
    enumerate_outcomes,
    hadamard_rotated,
    pauli_string_expectation,
    prepare_logical_bell,
)

LN2 = math.log(2.0)

# frozen golden numbers, computed once from this enumeration
GOLDEN_D2_T010 = {1: 0.568897190507905, 2: 0.436276145046853, "inf": 0.405699058068465}


def test_preparation_invariants(bell2, bell3):
    for state in (bell2, bell3):
        rho = state.reference_reduced()
        assert np.abs(rho - np.eye(2) / 2).max() < 1e-12  # maximally mixed reference
        assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-12
        lat = state.lattice
        for face in lat.plaquettes():
            assert pauli_string_expectation(state, "Z", face) == pytest.approx(1.0, abs=1e-12)
        for star in lat.interior_stars():
            assert pauli_string_expectation(state, "X", star) == pytest.approx(1.0, abs=1e-12)
        # logical algebra: X_L and Z_L commute with checks, anticommute together
        assert pauli_string_expectation(state, "X", state.logical_x_support) == pytest.approx(
            0.0, abs=1e-12)


def test_reference_entropy_is_ln2(bell3):
    rho = bell3.reference_reduced()
    w = np.linalg.eigvalsh(rho)
    assert -(w * np.log(w)).sum() == pytest.approx(LN2, abs=1e-12)


def test_memory_guard():
    with pytest.raises(ValueError):
        prepare_logical_bell(4)
    with pytest.raises(ValueError):
        prepare_logical_bell(1)


def test_born_normalization(oracle_enum):
    rng = np.random.default_rng(8)
    pts = [(rng.uniform(0.01, 0.24), rng.uniform(0.0, 0.5)) for _ in range(20)]
    for t, th in pts:
        res = oracle_enum(2, round(t, 6), round(th, 6))
        assert abs(sum(r.p for r in res) - 1.0) < 1e-10


def test_t0_uniform(oracle_enum):
    res = oracle_enum(2, 0.0, 0.17)
    for r in res:
        assert r.p == pytest.approx(2.0 ** -5, abs=1e-12)
        assert np.abs(r.rho_r() - np.eye(2) / 2).max() < 1e-12


def test_projective_limit_pure_states(bell2):
    res = enumerate_outcomes(bell2, math.pi / 4, 0.0)
    tot = 0.0
    for r in res:
        if r.p < 1e-14:
            continue
        tot += r.p
        w = np.linalg.eigvalsh(r.rho_r())
        assert w.max() > 1.0 - 1e-10  # rank 1: all information read out
    assert abs(tot - 1.0) < 1e-10


def test_kappa_consistent_with_spectrum(oracle_enum):
    res = oracle_enum(2, 0.13, 0.3)
    for r in res:
        w = np.linalg.eigvalsh(r.rho_r())
        assert abs(w[1] - (1 + r.kappa_norm) / 2) < 1e-10
        assert abs(w[0] - (1 - r.kappa_norm) / 2) < 1e-10
        assert r.kappa_norm <= 1 + 1e-10


def test_golden_values(oracle_enum):
    res = oracle_enum(2, 0.1, 0.0)
    assert coherent_info_exact(res, 1) == pytest.approx(GOLDEN_D2_T010[1], abs=1e-12)
    assert coherent_info_exact(res, 2) == pytest.approx(GOLDEN_D2_T010[2], abs=1e-12)
    assert coherent_info_exact(res, math.inf) == pytest.approx(GOLDEN_D2_T010["inf"], abs=1e-12)


def test_limits(oracle_enum):
    res = oracle_enum(2, 0.0, 0.2)
    for n in (1, 2, math.inf):
        assert coherent_info_exact(res, n) == pytest.approx(LN2, abs=1e-12)
    res = enumerate_outcomes(prepare_logical_bell(2), math.pi / 4, 0.0)
    assert coherent_info_exact(res, 1) == pytest.approx(0.0, abs=1e-10)


def test_self_dual_enhances_coherent_info(oracle_enum):
    # at fixed small d the self-dual angle retains more information
    ic_z = coherent_info_exact(oracle_enum(2, 0.15, 0.0), 1)
    ic_sd = coherent_info_exact(oracle_enum(2, 0.15, 0.25), 1)
    assert ic_sd > ic_z
    assert ic_sd == pytest.approx(0.460513667245933, abs=1e-12)
    assert ic_z == pytest.approx(0.309341843905236, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_hadamard_duality_exact(d, bell2, bell3, oracle_enum):
    state = bell2 if d == 2 else bell3
    rot = hadamard_rotated(state)
    for t, th in ((0.09, 0.1), (0.16, 0.35)):
        a = enumerate_outcomes(state, t * math.pi, th * math.pi)
        b = enumerate_outcomes(rot, t * math.pi, (0.5 - th) * math.pi)
        ia, ib = coherent_info_exact(a, 1), coherent_info_exact(b, 1)
        assert abs(ia - ib) < 1e-10


def test_monotone_in_t_at_theta0(oracle_enum):
    ts = [0.02, 0.06, 0.10, 0.14, 0.18, 0.22]
    vals = [coherent_info_exact(oracle_enum(2, t, 0.0), 1) for t in ts]
    for a, b in zip(vals, vals[1:]):
        assert b <= a + 1e-9


def test_gray_enumeration_matches_direct(bell2):
    # the incremental walk agrees with per-outcome reconstruction
    t, th = 0.17 * math.pi, 0.22 * math.pi
    res = enumerate_outcomes(bell2, t, th)
    from telecode.channel import kraus_matrix
    from telecode.oracle import apply_single_site

    plus, minus = bell2.psi_pm()
    rng = np.random.default_rng(0)
    for k in rng.choice(len(res), 6, replace=False):
        r = res[k]
        w = np.vstack([plus, minus])
        for q, s in enumerate(r.outcomes):
            w = apply_single_site(w, kraus_matrix(t, th, 0.0, int(s)), q)
        g = w @ w.conj().T
        assert abs((g[0, 0].real + g[1, 1].real) / 2 - r.p) < 1e-12

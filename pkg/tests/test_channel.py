import math

import numpy as np
import pytest

from telecode.channel import (
    ProtocolParams,
    beta_from_t,
    couplings_from,
    disorder_prob,
    hadamard_dual_params,
    kraus_matrix,
    measurement_axis,
)

# atanh(sqrt(2)/2) to 29 digits (arbitrary-precision cross-check)
BETA_AT_PI8 = 0.88137358701954302523260932498


def test_beta_endpoints():
    assert beta_from_t(0.0) == 0.0
    assert math.isinf(beta_from_t(math.pi / 4))
    assert abs(beta_from_t(math.pi / 8) - BETA_AT_PI8) < 1e-12


def test_beta_monotone_and_domain():
    ts = np.linspace(0.0, math.pi / 4 - 1e-6, 50)
    vals = [beta_from_t(t) for t in ts]
    assert all(b2 > b1 for b1, b2 in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        beta_from_t(-0.01)
    with pytest.raises(ValueError):
        beta_from_t(math.pi / 4 + 0.01)


def test_couplings_limits():
    # theta = 0: four-spin channel frozen
    c = couplings_from(0.1 * math.pi, 0.0)
    assert c.k_saturated and c.exp_minus_2k == 0.0
    # t -> pi/4: J -> atanh(cos theta); atanh is ill-conditioned near 1, so
    # compare the arguments rather than the diverging outputs
    for th in (0.1, 0.25 * math.pi, 1.2):
        c = couplings_from(math.pi / 4, th)
        assert abs(math.tanh(c.j) - math.cos(th)) < 1e-14
    # theta = pi/4 self-dual: sinh(J) = e^{-2K} for all t
    for t in np.linspace(0.01, 0.249, 9) * math.pi:
        c = couplings_from(t, math.pi / 4)
        assert abs(math.sinh(c.j) - c.exp_minus_2k) < 1e-12
    # theta = pi/2: J = 0, e^{-2K} finite limit sin(2t)
    c = couplings_from(0.13 * math.pi, math.pi / 2)
    assert c.j == 0.0  # snapped limit
    assert abs(c.exp_minus_2k - math.sin(0.26 * math.pi)) < 1e-12


def test_couplings_continuity_at_limits():
    # one-sided numerical limits agree with the stated closed-form endpoints
    t = 0.11 * math.pi
    eps = 1e-7
    c_edge = couplings_from(t, math.pi / 2)
    c_near = couplings_from(t, math.pi / 2 - eps)
    assert abs(c_near.j - c_edge.j) < 1e-6
    assert abs(c_near.exp_minus_2k - c_edge.exp_minus_2k) < 1e-6
    c_near0 = couplings_from(t, eps)
    assert c_near0.exp_minus_2k < 1e-6  # -> 0 at theta -> 0


def test_kraus_completeness_grid():
    rng = np.random.default_rng(11)
    for _ in range(100):
        t = rng.uniform(0.0, math.pi / 4)
        th = rng.uniform(0.0, math.pi / 2)
        ph = rng.uniform(0.0, 2 * math.pi)
        m_p = kraus_matrix(t, th, ph, 1)
        m_m = kraus_matrix(t, th, ph, -1)
        total = m_p.conj().T @ m_p + m_m.conj().T @ m_m
        assert np.abs(total - np.eye(2)).max() < 1e-12
        for m in (m_p, m_m):
            # Hermitian positive semidefinite
            assert np.abs(m - m.conj().T).max() < 1e-12
            assert np.linalg.eigvalsh(m).min() > -1e-14


def test_kraus_special_points():
    for s in (1, -1):
        assert np.abs(kraus_matrix(0.0, 0.3, 0.7, s) - np.eye(2) / math.sqrt(2)).max() < 1e-14
    # diagonal generator: closed-form matrix exponential
    t, s = 0.09 * math.pi, -1
    beta = beta_from_t(t)
    expect = np.diag([math.exp(s * beta / 2), math.exp(-s * beta / 2)])
    expect /= math.sqrt(2 * math.cosh(beta))
    assert np.abs(kraus_matrix(t, 0.0, 0.0, s) - expect).max() < 1e-14
    # projective limit onto Z = s
    for s in (1, -1):
        m = kraus_matrix(math.pi / 4, 0.0, 0.0, s)
        proj = np.diag([1.0, 0.0]) if s == 1 else np.diag([0.0, 1.0])
        assert np.abs(m - proj).max() < 1e-14


def test_disorder_prob():
    assert disorder_prob(math.pi / 4, "active") == pytest.approx(0.0, abs=1e-30)
    assert disorder_prob(0.0, "active") == pytest.approx(0.5)
    p = disorder_prob(0.143 * math.pi, "active")
    assert abs(p - 0.109) < 2e-3  # sits at the known flip-rate scale
    assert disorder_prob(0.107 * math.pi, "passive") == pytest.approx(
        math.sin(0.107 * math.pi) ** 2)
    # angle-convention consistency
    for t in np.linspace(0, math.pi / 4, 11):
        assert disorder_prob(t, "active") == pytest.approx(
            disorder_prob(math.pi / 4 - t, "passive"), abs=1e-14)
    with pytest.raises(ValueError):
        disorder_prob(0.1, "sideways")


def test_hadamard_dual_params():
    p = ProtocolParams(t_over_pi=0.1, theta_over_pi=0.25)
    assert hadamard_dual_params(p).theta_over_pi == 0.25  # self-dual fixed point
    p = ProtocolParams(t_over_pi=0.1, theta_over_pi=0.0)
    q = hadamard_dual_params(p)
    assert q.theta_over_pi == 0.5
    assert hadamard_dual_params(q) == p  # involution
    with pytest.raises(ValueError):
        hadamard_dual_params(ProtocolParams(t_over_pi=0.1, phi_over_pi=0.3))


def test_protocol_params_validation():
    with pytest.raises(ValueError):
        ProtocolParams(t_over_pi=0.3)
    with pytest.raises(ValueError):
        ProtocolParams(t_over_pi=0.1, d=1)
    with pytest.raises(ValueError):
        ProtocolParams(t_over_pi=0.1, n_replica=3)
    with pytest.raises(ValueError):
        ProtocolParams(t_over_pi=0.1, chi_max=1)
    with pytest.raises(ValueError):
        ProtocolParams(t_over_pi=0.1, svd_cutoff=1.0)
    # cutoff 0 is the exact-contraction mode and is allowed
    ProtocolParams(t_over_pi=0.1, svd_cutoff=0.0)


def test_measurement_axis_unit_norm():
    rng = np.random.default_rng(3)
    for _ in range(20):
        ax = measurement_axis(rng.uniform(0, math.pi / 2), rng.uniform(0, 2 * math.pi))
        assert np.abs(ax @ ax - np.eye(2)).max() < 1e-12

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chanstat.channel import (ChannelConfig, Marginal, PathParams, PathPrior,
                              PowerPrior, sample_path_arrays, steering_vector)
from chanstat.moments import (closed_form_moments, mc_conditional_moments, sample_moments,
                              structure_convergence, verify_theorem1)
from chanstat.rng import Streams
from chanstat.structure import structure_nmse

RX2 = ChannelConfig(m_r=2)
RX16 = ChannelConfig(m_r=16)
MULTI = ChannelConfig(m_sc=2, m_sn=3, m_r=2, m_t=2, delta_f=60e3, delta_t=2e-4)
RICH_PRIOR = PathPrior(delay=Marginal("uniform", (0.0, 2e-6)), doppler=Marginal("normal", (0.0, 300.0)),
                       theta_t=Marginal("uniform", (-1.5, 1.5)))


def _mc_oracle(cfg, paths, n, seed):
    """Second moment by direct Monte Carlo over phases, independent of the package."""
    gen = np.random.default_rng(seed)
    vs = []
    for q in paths:
        v = np.ones(1, dtype=complex)
        for dom, par in zip(("frequency", "time", "rx", "tx"), (q.tau, q.nu, q.theta_r, q.theta_t)):
            v = np.kron(v, steering_vector(dom, par, cfg.domain_size(dom), cfg))
        vs.append(math.sqrt(q.p) * v)
    vs = np.array(vs)
    beta = gen.uniform(0, 2 * np.pi, (n, len(paths)))
    h = np.exp(-1j * beta) @ vs
    return h.T @ h.conj() / n, h.mean(axis=0)


def test_single_path_example():
    paths = [PathParams(p=1.0, theta_r=0.0)]
    mean, cov = closed_form_moments(RX2, paths)
    np.testing.assert_array_equal(mean, 0)
    np.testing.assert_allclose(cov, [[1, 1], [1, 1]], atol=1e-15)
    mc, _ = _mc_oracle(RX2, paths, 10**6, 0)
    np.testing.assert_allclose(cov, mc, atol=5e-3)


def test_two_path_endfire_aliases():
    # sin(+-pi/2) = +-1 gives e^{-j pi} = e^{j pi}: both paths share [1, -1]
    paths = [PathParams(p=0.5, theta_r=math.pi / 2), PathParams(p=0.5, theta_r=-math.pi / 2)]
    _, cov = closed_form_moments(RX2, paths)
    np.testing.assert_allclose(cov, [[1, -1], [-1, 1]], atol=1e-15)
    mc, mean = _mc_oracle(RX2, paths, 10**6, 1)
    np.testing.assert_allclose(cov, mc, atol=5e-3)
    assert np.linalg.norm(mean) < 5e-3


def test_two_orthogonal_paths_give_identity():
    paths = [PathParams(p=0.5, theta_r=0.0), PathParams(p=0.5, theta_r=math.pi / 2)]
    _, cov = closed_form_moments(RX2, paths)
    np.testing.assert_allclose(cov, np.eye(2), atol=1e-15)
    mc, _ = _mc_oracle(RX2, paths, 10**6, 2)
    np.testing.assert_allclose(cov, mc, atol=5e-3)


def test_closed_form_matches_mc_oracle_multidomain():
    paths = sample_path_arrays(RICH_PRIOR, 4, 1, 3).to_paths(0)
    _, cov = closed_form_moments(MULTI, paths)
    mc, _ = _mc_oracle(MULTI, paths, 2 * 10**5, 2)
    assert np.linalg.norm(cov - mc) / np.linalg.norm(cov) < 0.02


@given(seed=st.integers(0, 2**32 - 1), l=st.integers(1, 6))
def test_closed_form_structure_psd_hermitian(seed, l):
    xi = sample_path_arrays(RICH_PRIOR, l, 1, seed)
    _, cov = closed_form_moments(MULTI, xi)
    np.testing.assert_allclose(cov, cov.conj().T, atol=1e-14)
    tr = np.trace(cov).real
    assert np.linalg.eigvalsh(cov)[0] >= -1e-10 * tr
    assert structure_nmse(cov, MULTI.dims) < 1e-24
    assert tr == pytest.approx(MULTI.size * xi.p.sum())


def test_phases_are_ignored():
    a = [PathParams(p=0.3, beta=0.1, theta_r=0.2), PathParams(p=0.7, beta=2.0, theta_r=-0.4)]
    b = [PathParams(p=0.3, beta=5.0, theta_r=0.2), PathParams(p=0.7, beta=0.0, theta_r=-0.4)]
    np.testing.assert_array_equal(closed_form_moments(RX16, a)[1], closed_form_moments(RX16, b)[1])


def test_mc_report_at_1e5():
    xi = sample_path_arrays(PathPrior(), 3, 1, 5)
    rep = mc_conditional_moments(RX16, xi, 10**5, 6)
    assert rep.n == 10**5
    assert rep.mean_norm <= rep.mean_bound <= 0.05
    assert rep.cov_rel_err <= 0.05
    assert rep.cov_nmse == pytest.approx(rep.cov_rel_err**2)
    assert rep.structure_nmse_mc <= 5e-3
    assert rep.structure_nmse_closed < 1e-24
    np.testing.assert_allclose(rep.cov, rep.cov.conj().T, atol=1e-10)
    assert set(rep.summary()) >= {"mean_norm", "cov_nmse", "n"}


def test_mc_requires_two_samples():
    with pytest.raises(ValueError):
        mc_conditional_moments(RX2, [PathParams()], 1, 0)


def test_mc_freezes_parameters():
    xi = sample_path_arrays(RICH_PRIOR, 3, 1, 0)
    rep = mc_conditional_moments(MULTI, xi, 50, 1)
    _, cov = closed_form_moments(MULTI, xi)
    # every sample has the same power profile: diagonal of h h^H sums to trace
    assert np.trace(rep.cov).real == pytest.approx(np.trace(cov).real, rel=0.5)
    np.testing.assert_array_equal(rep.cov_closed, cov)


def test_sample_moments_non_centered():
    h = np.array([[1.0 + 0j, 1.0], [1.0, 1.0]])
    mean, cov = sample_moments(h)
    np.testing.assert_allclose(mean, [1, 1])
    np.testing.assert_allclose(cov, np.ones((2, 2)))


def test_spike_mean_equals_channel():
    xi = sample_path_arrays(PathPrior(), 3, 1, 2)
    rep = mc_conditional_moments(RX16, xi, 10, 0, beta="spike")
    paths = xi.to_paths(0)
    v = np.zeros(16, dtype=complex)
    for q in paths:
        v += math.sqrt(q.p) * steering_vector("rx", q.theta_r, 16)
    np.testing.assert_allclose(rep.mean, v, atol=1e-12)
    assert rep.mean_norm > 10 * 0.05


def test_verify_default_passes():
    check = verify_theorem1(RX16, PathPrior(), 3, 5, 10**5, Streams(0), tol=0.05)
    assert check.passed
    assert len(check.reports) == 5
    assert check.max_mean_norm <= 0.05 and check.max_cov_rel_err <= 0.05
    doc = json.loads(check.to_json(seed=0))
    assert doc["passed"] is True and doc["seed"] == 0 and len(doc["draws"]) == 5


def test_verify_single_path_prior_passes():
    prior = PathPrior(power=PowerPrior("single"))
    assert verify_theorem1(RX16, prior, 3, 3, 20_000, 1, tol=0.05).passed


def test_verify_negative_control_fails():
    check = verify_theorem1(RX16, PathPrior(), 3, 3, 1000, 1, tol=0.05, beta="spike")
    assert not check.passed
    assert check.min_mean_norm > 10 * 0.05


@pytest.mark.parametrize("tol", [0.0, -1.0, math.nan])
def test_verify_rejects_nonpositive_tol(tol):
    with pytest.raises(ValueError, match="tolerance unsatisfiable"):
        verify_theorem1(RX16, PathPrior(), 3, 1, 100, 0, tol=tol)


def test_verify_deterministic():
    a = verify_theorem1(RX16, PathPrior(), 3, 2, 1000, 9).to_json(9)
    b = verify_theorem1(RX16, PathPrior(), 3, 2, 1000, 9).to_json(9)
    assert a == b


def test_frobenius_error_rate_over_seeds():
    """Averaged over replicates, 16x more samples cut the error by about 4x."""
    ns = [256, 4096]
    err = np.zeros(2)
    for r in range(100):
        s = Streams(r)
        xi = sample_path_arrays(PathPrior(), 3, 1, s.child(0))
        err += [e for _, _, e in structure_convergence(RX16, xi, ns, s.child(1))]
    assert 2.5 <= err[0] / err[1] <= 6


def test_structure_convergence_prefixes():
    xi = sample_path_arrays(PathPrior(), 3, 1, 0)
    out = structure_convergence(RX16, xi, [1, 10, 100], 0)
    assert [n for n, _, _ in out] == [1, 10, 100]
    # at n = 1 the estimate is a rank-one outer product, far from Toeplitz
    assert out[0][1] > 0.01

"""Metropolis-Hastings posterior sampler: proposal mechanics, Monte Carlo
region probabilities, determinism, and prior recovery with no data."""

import csv
import math

import numpy as np
import pytest
import scipy.stats

from revpref.consistency import ConsistencySet
from revpref.posterior import (
    ChainState,
    PriorBox,
    export_trace,
    log_likelihood,
    mc_region_log_prob,
    mh_step,
    posterior_mean_kappa,
    posterior_mean_mu,
    propose,
    run_chain,
)
from revpref.vmf import VmfParams


class _FixedNoise:
    """rng stub delivering a chosen Gaussian perturbation."""

    def __init__(self, mu_eps, kappa_eps):
        self.mu_eps = np.asarray(mu_eps, float)
        self.kappa_eps = float(kappa_eps)
        self.calls = 0

    def standard_normal(self, size=None):
        if size is None:
            return self.kappa_eps
        return self.mu_eps.copy()


def test_propose_mu_normalization_example():
    # mu=(0.6,0.8) + eps=(0.3,0) -> (0.9,0.8)/sqrt(1.45)
    theta = VmfParams(mu=np.array([0.6, 0.8]), kappa=5.0)
    rng = _FixedNoise(mu_eps=np.array([0.3, 0.0]) / 1.0, kappa_eps=0.0)
    # propose scales eps by sigma; feed unit sigma and raw eps
    out = propose(theta, sigma_mu=1.0, sigma_kappa=1.0, prior=PriorBox(1.0, 10.0), rng=rng)
    expected = np.array([0.9, 0.8]) / math.sqrt(1.45)
    assert out.mu == pytest.approx(expected, abs=1e-12)
    assert out.mu == pytest.approx([0.74740, 0.66435], abs=5e-5)
    assert out.kappa == pytest.approx(5.0)


def test_propose_kappa_reflection_example():
    # kappa=1.1, eps=-0.3, box (1,10) -> reflected to 1.2
    theta = VmfParams(mu=np.array([1.0, 0.0]), kappa=1.1)
    rng = _FixedNoise(mu_eps=np.array([0.0, 0.0]), kappa_eps=-0.3)
    out = propose(theta, sigma_mu=1.0, sigma_kappa=1.0, prior=PriorBox(1.0, 10.0), rng=rng)
    assert out.kappa == pytest.approx(1.2)
    assert np.allclose(out.mu, theta.mu)


def test_propose_identity_when_no_noise():
    theta = VmfParams(mu=np.array([0.6, 0.8]), kappa=5.0)
    rng = _FixedNoise(mu_eps=np.array([0.0, 0.0]), kappa_eps=0.0)
    out = propose(theta, sigma_mu=1.0, sigma_kappa=1.0, prior=PriorBox(1.0, 10.0), rng=rng)
    assert np.allclose(out.mu, theta.mu)
    assert out.kappa == theta.kappa


def test_propose_validates_scales():
    theta = VmfParams(mu=np.array([1.0, 0.0]), kappa=5.0)
    with pytest.raises(ValueError):
        propose(theta, sigma_mu=0.0, sigma_kappa=1.0, prior=PriorBox(), rng=np.random.default_rng(0))


def hemisphere_set(n, axis=0):
    """{u : u_axis <= 0} as a one-row consistency set."""
    V = np.zeros((1, n))
    V[0, axis] = 1.0
    return ConsistencySet(V=V, w=np.zeros(1))


def test_mc_region_full_sphere_is_log_one():
    cset = ConsistencySet(V=np.zeros((0, 3)), w=np.zeros(0))
    theta = VmfParams(mu=np.array([0.0, 0.0, 1.0]), kappa=2.0)
    assert mc_region_log_prob(theta, cset, M=128, rng=np.random.default_rng(0)) == 0.0


def test_mc_region_hemisphere_is_log_half():
    # mu orthogonal to the hemisphere axis: probability 1/2
    M = 4096
    theta = VmfParams(mu=np.array([0.0, 0.0, 1.0]), kappa=2.0)
    val = mc_region_log_prob(theta, hemisphere_set(3), M=M, rng=np.random.default_rng(1))
    assert math.exp(val) == pytest.approx(0.5, abs=3.0 / math.sqrt(M))


def test_mc_region_floor_prevents_minus_inf():
    # region on the far side of a very concentrated vMF: count 0 -> floor 1/2
    theta = VmfParams(mu=np.array([1.0, 0.0]), kappa=50.0)
    val = mc_region_log_prob(theta, hemisphere_set(2), M=256, rng=np.random.default_rng(2))
    assert val == pytest.approx(math.log(0.5 / 256))


def test_log_likelihood_empty_and_hemispheres():
    theta = VmfParams(mu=np.array([0.0, 0.0, 1.0]), kappa=2.0)
    assert log_likelihood(theta, [], M=64, rng=np.random.default_rng(0)) == 0.0
    M = 4096
    sets = [hemisphere_set(3), hemisphere_set(3)]
    val = log_likelihood(theta, sets, M=M, rng=np.random.default_rng(3))
    assert val == pytest.approx(2.0 * math.log(0.5), abs=2 * 3.0 / math.sqrt(M))


def test_run_chain_k0_and_determinism():
    state = run_chain([], K=0, M=64, seed=11, n=3)
    assert state.step_index == 0
    assert len(state.trace) == 1
    a = run_chain([hemisphere_set(3)], K=20, M=64, seed=12, n=3)
    b = run_chain([hemisphere_set(3)], K=20, M=64, seed=12, n=3)
    assert [e.theta.kappa for e in a.trace] == [e.theta.kappa for e in b.trace]
    assert all(np.array_equal(x.theta.mu, y.theta.mu) for x, y in zip(a.trace, b.trace))


def test_chain_trace_length_invariant():
    state = run_chain([hemisphere_set(3)], K=15, M=64, seed=13, n=3)
    assert len(state.trace) == state.step_index + 1 == 16


def test_equal_likelihood_always_accepts():
    # no data: likelihoods are identically 0, so every proposal is accepted
    state = run_chain([], K=50, M=16, seed=14, n=3)
    assert all(e.accepted for e in state.trace)


def test_prior_recovery_no_data():
    """With no data the chain is a random walk whose stationary kappa
    marginal is the uniform prior; KS test on thinned draws."""
    prior = PriorBox(0.5, 20.0)
    state = run_chain([], K=60_000, M=4, sigma_mu=0.5, sigma_kappa=5.0,
                      prior=prior, seed=15, n=3)
    kappas = np.array([e.theta.kappa for e in state.trace[1000::60]])
    result = scipy.stats.kstest(kappas, scipy.stats.uniform(prior.kappa_lo,
                                                            prior.kappa_hi - prior.kappa_lo).cdf)
    assert result.pvalue > 0.001


def test_posterior_means():
    state = run_chain([hemisphere_set(3)], K=40, M=64, seed=16, n=3)
    mu = posterior_mean_mu(state)
    assert np.linalg.norm(mu) == pytest.approx(1.0)
    kap = posterior_mean_kappa(state)
    assert PriorBox().kappa_lo <= kap <= PriorBox().kappa_hi


def test_export_trace_csv(tmp_path):
    state = run_chain([hemisphere_set(3)], K=5, M=32, seed=17, n=3)
    path = tmp_path / "trace.csv"
    export_trace(state, path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    assert set(rows[0]) == {"step", "mu_1", "mu_2", "mu_3", "kappa", "log_lik_hat", "accepted"}
    assert float(rows[-1]["kappa"]) == state.theta.kappa


def test_prior_box_validation():
    with pytest.raises(ValueError):
        PriorBox(0.0, 10.0)
    with pytest.raises(ValueError):
        PriorBox(5.0, 5.0)

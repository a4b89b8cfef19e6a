"""Metropolis-Hastings sampling from the posterior over vMF parameters,
with a Monte Carlo region-probability likelihood.

Each likelihood evaluation draws one shared batch of M vMF samples and
counts, per observation, how many land in its consistency set.  The two
likelihoods entering an acceptance ratio reuse one uniform stream
(common random numbers), and both are recomputed at every step, so the
chain is a noisy-MH approximation of exact MH.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from revpref.consistency import StackedSets
from revpref.vmf import VmfParams, sample_uniform_sphere, sample_vmf

DEFAULT_M = 1024


@dataclass(frozen=True)
class PriorBox:
    """Uniform prior support: the sphere times (kappa_lo, kappa_hi)."""

    kappa_lo: float = 0.5
    kappa_hi: float = 20.0

    def __post_init__(self):
        if not 0 < self.kappa_lo < self.kappa_hi:
            raise ValueError("need 0 < kappa_lo < kappa_hi")

    def draw(self, n: int, rng: np.random.Generator) -> VmfParams:
        mu = sample_uniform_sphere(n, rng)
        kappa = rng.uniform(self.kappa_lo, self.kappa_hi)
        return VmfParams(mu=mu, kappa=kappa)


@dataclass
class TraceEntry:
    theta: VmfParams
    log_lik_hat: float
    accepted: bool


@dataclass
class ChainState:
    theta: VmfParams
    log_lik_hat: float
    step_index: int
    trace: list[TraceEntry] = field(default_factory=list)


def default_sigma_mu(n: int) -> float:
    return 0.3 / math.sqrt(n)


def default_sigma_kappa(prior: PriorBox) -> float:
    return 0.025 * (prior.kappa_hi - prior.kappa_lo)


def _as_stacked(sets) -> StackedSets:
    return sets if isinstance(sets, StackedSets) else StackedSets(list(sets))


def mc_region_log_prob(theta: VmfParams, cset, M: int = DEFAULT_M, u_samples=None, rng=None) -> float:
    """log of max(c, 1/2)/M where c counts vMF(theta) samples inside cset.

    A shared batch may be passed via u_samples; otherwise one is drawn.
    The half-count floor keeps the estimate finite.
    """
    if u_samples is None:
        u_samples = sample_vmf(theta, rng, size=M)
    M = u_samples.shape[0]
    if cset.m == 0:
        c = M
    else:
        c = int(np.sum(np.all(cset.V @ u_samples.T <= cset.w[:, None], axis=0)))
    return math.log(max(c, 0.5) / M)


def log_likelihood(theta: VmfParams, sets, M: int = DEFAULT_M, rng=None) -> float:
    """Monte Carlo log-likelihood over all observations with one shared
    sample batch of M vMF(theta) draws."""
    stacked = _as_stacked(sets)
    if stacked.T == 0:
        return 0.0
    u_samples = sample_vmf(theta, rng, size=M)
    counts = stacked.counts_per_set(u_samples)
    return float(np.sum(np.log(np.maximum(counts, 0.5) / M)))


def _reflect(x: float, lo: float, hi: float) -> float:
    width = hi - lo
    z = (x - lo) % (2.0 * width)
    if z > width:
        z = 2.0 * width - z
    return lo + z


def propose(theta: VmfParams, sigma_mu: float, sigma_kappa: float, prior: PriorBox,
            rng: np.random.Generator) -> VmfParams:
    """Symmetric random-walk proposal: Gaussian jitter on mu renormalized
    to the sphere, Gaussian jitter on kappa reflected into the prior box."""
    if sigma_mu <= 0 or sigma_kappa <= 0:
        raise ValueError("proposal scales must be positive")
    while True:
        mu_new = theta.mu + sigma_mu * rng.standard_normal(theta.n)
        norm = np.linalg.norm(mu_new)
        if norm > 0:
            break
    mu_new /= norm
    kappa_new = _reflect(theta.kappa + sigma_kappa * rng.standard_normal(), prior.kappa_lo, prior.kappa_hi)
    return VmfParams(mu=mu_new, kappa=kappa_new)


def mh_step(state: ChainState, sets, M: int, sigma_mu: float, sigma_kappa: float,
            prior: PriorBox, rng: np.random.Generator) -> ChainState:
    """One Metropolis-Hastings step; the uniform prior cancels in the ratio."""
    stacked = _as_stacked(sets)
    theta_new = propose(state.theta, sigma_mu, sigma_kappa, prior, rng)
    crn_seed = int(rng.integers(0, 2**63 - 1))
    ll_new = log_likelihood(theta_new, stacked, M, np.random.default_rng(crn_seed))
    ll_old = log_likelihood(state.theta, stacked, M, np.random.default_rng(crn_seed))
    accepted = math.log(rng.uniform()) < ll_new - ll_old
    theta = theta_new if accepted else state.theta
    ll = ll_new if accepted else ll_old
    state.trace.append(TraceEntry(theta=theta, log_lik_hat=ll, accepted=bool(accepted)))
    return ChainState(theta=theta, log_lik_hat=ll, step_index=state.step_index + 1, trace=state.trace)


def run_chain(sets, K: int, M: int = DEFAULT_M, sigma_mu: float | None = None,
              sigma_kappa: float | None = None, prior: PriorBox | None = None,
              seed: int | None = None, n: int | None = None) -> ChainState:
    """Run K MH steps from a prior draw; returns the final state with the
    full trace (burn-in is not discarded here)."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    stacked = _as_stacked(sets)
    if n is None:
        if stacked.V is None:
            raise ValueError("dimension n required when all sets are empty")
        n = stacked.V.shape[1]
    prior = prior or PriorBox()
    sigma_mu = sigma_mu if sigma_mu is not None else default_sigma_mu(n)
    sigma_kappa = sigma_kappa if sigma_kappa is not None else default_sigma_kappa(prior)
    rng = np.random.default_rng(seed)
    theta0 = prior.draw(n, rng)
    ll0 = log_likelihood(theta0, stacked, M, np.random.default_rng(int(rng.integers(0, 2**63 - 1))))
    state = ChainState(theta=theta0, log_lik_hat=ll0, step_index=0,
                       trace=[TraceEntry(theta=theta0, log_lik_hat=ll0, accepted=True)])
    for _ in range(K):
        state = mh_step(state, stacked, M, sigma_mu, sigma_kappa, prior, rng)
    return state


def posterior_mean_mu(state: ChainState, burn_frac: float = 0.5) -> np.ndarray:
    """Normalized mean direction over the post-burn-in trace."""
    start = int(len(state.trace) * burn_frac)
    mus = np.array([e.theta.mu for e in state.trace[start:]])
    mean = mus.mean(axis=0)
    norm = np.linalg.norm(mean)
    return mean / norm if norm > 0 else state.theta.mu


def posterior_mean_kappa(state: ChainState, burn_frac: float = 0.5) -> float:
    start = int(len(state.trace) * burn_frac)
    return float(np.mean([e.theta.kappa for e in state.trace[start:]]))


def export_trace(state: ChainState, path) -> None:
    """Write the chain trace as CSV: step, mu_1..mu_n, kappa, log_lik_hat, accepted."""
    n = state.theta.n
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step"] + [f"mu_{i + 1}" for i in range(n)] + ["kappa", "log_lik_hat", "accepted"])
        for k, entry in enumerate(state.trace):
            writer.writerow([k] + [repr(v) for v in entry.theta.mu]
                            + [repr(entry.theta.kappa), repr(entry.log_lik_hat), int(entry.accepted)])

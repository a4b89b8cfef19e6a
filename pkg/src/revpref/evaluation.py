"""Metrics: consistency accuracy on fresh observations, the predictive
accuracy for the Gaussian setting, and the coupled-mismatch distance
diagnostic.

The predictive accuracy is reported as (mu*.x_tilde) / (mu*.x_star),
i.e. one minus the relative regret, so that a perfect estimate scores 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from revpref.knapsack import solve_batch
from revpref.vmf import VmfParams, sample_uniform_sphere, sample_vmf

AB_LAWS = ("uniform_i", "discrete_ii", "fixed_a_iii")
BUNDLE_TOL = 1e-7
CONSISTENT_TOL = 1e-9


@dataclass(frozen=True)
class VmfLaw:
    """Utility draws follow vMF(mu, kappa)."""

    mu: np.ndarray
    kappa: float

    def params(self) -> VmfParams:
        return VmfParams(mu=self.mu, kappa=self.kappa)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return sample_vmf(self.params(), rng, size=size)


@dataclass(frozen=True)
class CorruptionLaw:
    """Utility equals u_star w.p. 1 - delta, else a corrupting draw
    (uniform on the sphere unless a sampler is supplied)."""

    u_star: np.ndarray
    delta: float
    corrupt_sampler: object = None

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        u = np.asarray(self.u_star, dtype=float)
        if abs(np.linalg.norm(u) - 1.0) > 1e-9:
            raise ValueError("u_star must have unit norm")
        object.__setattr__(self, "u_star", u)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        n = len(self.u_star)
        out = np.tile(self.u_star, (size, 1))
        corrupt = rng.uniform(size=size) < self.delta
        k = int(corrupt.sum())
        if k:
            if self.corrupt_sampler is None:
                out[corrupt] = sample_uniform_sphere(n, rng, size=k)
            else:
                out[corrupt] = self.corrupt_sampler(rng, k)
        return out


@dataclass(frozen=True)
class Scenario:
    """Data-generating description: dimension, (a, b) law, utility law."""

    n: int
    ab_law: str
    utility_law: object = None
    seed: int | None = None

    def __post_init__(self):
        if self.ab_law not in AB_LAWS:
            raise ValueError(f"unknown ab_law {self.ab_law!r}; expected one of {AB_LAWS}")
        if self.n < 2:
            raise ValueError("n must be at least 2")


def draw_ab(scenario: Scenario, N: int, rng: np.random.Generator):
    """Sample N (a, b) pairs from the scenario's constraint law."""
    n = scenario.n
    if scenario.ab_law == "uniform_i":
        A = rng.uniform(1.0, 2.0, size=(N, n))
        B = rng.uniform(1.0, n, size=N)
    elif scenario.ab_law == "discrete_ii":
        A = rng.integers(1, 3, size=(N, n)).astype(float)
        B = rng.integers(1, n + 1, size=N).astype(float)
    else:  # fixed_a_iii
        A = np.ones((N, n))
        B = rng.integers(1, n + 1, size=N).astype(float)
    return A, B


def draw_utilities(scenario: Scenario, N: int, rng: np.random.Generator) -> np.ndarray:
    if scenario.utility_law is None:
        raise ValueError("scenario has no utility law")
    return scenario.utility_law.draw(rng, N)


def acc(u_hat, scenario: Scenario, N: int, rng: np.random.Generator) -> float:
    """Probability that u_hat is consistent with a fresh observation,
    estimated by Monte Carlo with the optimality oracle as membership test."""
    if N < 1:
        raise ValueError("N must be positive")
    u_hat = np.asarray(u_hat, dtype=float)
    U = draw_utilities(scenario, N, rng)
    A, B = draw_ab(scenario, N, rng)
    X, _ = solve_batch(U, A, B)
    _, best_hat = solve_batch(u_hat, A, B)
    return float(np.mean(X @ u_hat >= best_hat - CONSISTENT_TOL))


def gaussian_pred_accuracy(mu_hat, mu_star, scenario: Scenario, N: int,
                           rng: np.random.Generator, max_rounds: int = 200) -> float:
    """Mean of (mu*.x_tilde) / (mu*.x_star) over fresh (a, b) draws, where
    x_tilde solves the knapsack under the estimate and x_star under the
    truth.  Draws whose true optimum value is 0 are resampled.
    """
    mu_hat = np.asarray(mu_hat, dtype=float)
    mu_star = np.asarray(mu_star, dtype=float)
    ratios = []
    needed = N
    for _ in range(max_rounds):
        A, B = draw_ab(scenario, needed, rng)
        X_star, val_star = solve_batch(mu_star, A, B)
        keep = val_star > CONSISTENT_TOL
        if np.any(keep):
            X_tilde, _ = solve_batch(mu_hat, A[keep], B[keep])
            ratios.append((X_tilde @ mu_star) / val_star[keep])
            needed -= int(keep.sum())
        if needed <= 0:
            break
    else:
        raise RuntimeError("degenerate sample budget exhausted (true optimum always 0)")
    return float(np.mean(np.concatenate(ratios)[:N]))


def coupled_mismatch(theta1: VmfParams, theta2: VmfParams, scenario: Scenario, N: int,
                     rng: np.random.Generator, shared_stream: bool = False) -> float:
    """P(x*(u1) != x*(u2)) under independently drawn u1 ~ vMF(theta1),
    u2 ~ vMF(theta2) and a shared (a, b) draw.

    shared_stream=True reuses one uniform stream for both utility draws
    (so identical parameters give mismatch exactly 0).
    """
    if N < 1:
        raise ValueError("N must be positive")
    A, B = draw_ab(scenario, N, rng)
    if shared_stream:
        seed = int(rng.integers(0, 2**63 - 1))
        U1 = sample_vmf(theta1, np.random.default_rng(seed), size=N)
        U2 = sample_vmf(theta2, np.random.default_rng(seed), size=N)
    else:
        U1 = sample_vmf(theta1, rng, size=N)
        U2 = sample_vmf(theta2, rng, size=N)
    X1, _ = solve_batch(U1, A, B)
    X2, _ = solve_batch(U2, A, B)
    return float(np.mean(np.any(np.abs(X1 - X2) > BUNDLE_TOL, axis=1)))


def theta_distance(theta1: VmfParams, theta2: VmfParams) -> float:
    """Euclidean distance on the concatenated (mu, kappa) parameter."""
    return float(np.sqrt(np.sum((theta1.mu - theta2.mu) ** 2) + (theta1.kappa - theta2.kappa) ** 2))

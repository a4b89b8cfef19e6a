"""von Mises-Fisher machinery: modified Bessel functions of the first
kind, the normalization constant, log-density, and exact sampling.

Density convention: f(u) = C_n(kappa) * exp(kappa * mu.u), so mu is the
mode of the distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-9
_MAX_SERIES_TERMS = 2000
_MAX_PROPOSALS = 10**6


@dataclass(frozen=True)
class VmfParams:
    """Mean direction on the unit sphere plus concentration kappa > 0."""

    mu: np.ndarray
    kappa: float

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim != 1 or len(mu) < 2:
            raise ValueError("mu must be a vector in R^n, n >= 2")
        if abs(np.linalg.norm(mu) - 1.0) > UNIT_TOL:
            raise ValueError("mu must have unit 2-norm")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def n(self) -> int:
        return len(self.mu)


def _series_sum(nu: float, x: float) -> float:
    """sum_k (x^2/4)^k / (k! Gamma(nu+k+1)); valid for nu > -1.

    All terms are positive, so the sum carries no cancellation and reaches
    near machine relative accuracy over the supported domain.
    """
    q = 0.25 * x * x
    term = 1.0 / math.gamma(nu + 1.0)
    total = term
    for k in range(1, _MAX_SERIES_TERMS):
        term *= q / (k * (nu + k))
        total += term
        if term <= total * 1e-17:
            return total
    raise OverflowError(f"Bessel series did not converge for nu={nu}, x={x}")


def bessel_i_ratio(nu: float, x: float) -> float:
    """I_nu(x) / x^nu, finite down to x = 0 (limit 1 / (2^nu Gamma(nu+1)))."""
    if nu <= -1:
        raise ValueError("order must exceed -1")
    if x < 0:
        raise ValueError("argument must be nonnegative")
    return 0.5**nu * _series_sum(nu, x)


def bessel_i(nu: float, x: float) -> float:
    """Modified Bessel function of the first kind, I_nu(x), for nu >= 0."""
    if nu < 0:
        raise ValueError("order must be nonnegative")
    if x < 0:
        raise ValueError("argument must be nonnegative")
    if x == 0.0:
        return 1.0 if nu == 0 else 0.0
    return (0.5 * x) ** nu * _series_sum(nu, x)


def log_bessel_i(nu: float, x: float) -> float:
    """log I_nu(x), computed without overflow over the supported domain."""
    if nu < 0:
        raise ValueError("order must be nonnegative")
    if x < 0:
        raise ValueError("argument must be nonnegative")
    if x == 0.0:
        return 0.0 if nu == 0 else -math.inf
    return nu * math.log(0.5 * x) + math.log(_series_sum(nu, x))


def log_norm_const(n: int, kappa: float) -> float:
    """log C_n(kappa) with C_n(kappa) = kappa^{n/2-1} / ((2 pi)^{n/2} I_{n/2-1}(kappa))."""
    if n < 2:
        raise ValueError("dimension must be at least 2")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    half = 0.5 * n
    return (half - 1.0) * math.log(kappa) - half * math.log(2 * math.pi) - log_bessel_i(half - 1.0, kappa)


def log_density(u, params: VmfParams) -> float:
    """Log of the vMF density at a unit vector u."""
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
        raise ValueError("u must lie on the unit sphere")
    return log_norm_const(params.n, params.kappa) + params.kappa * float(params.mu @ u)


def mean_resultant_length(n: int, kappa: float) -> float:
    """Expected length of the sample mean: I_{n/2}(kappa) / I_{n/2-1}(kappa)."""
    return math.exp(log_bessel_i(0.5 * n, kappa) - log_bessel_i(0.5 * n - 1.0, kappa))


def _householder_to(mu: np.ndarray, samples: np.ndarray) -> np.ndarray:
    """Reflect samples so that the e_1 axis maps onto mu."""
    n = len(mu)
    e1 = np.zeros(n)
    e1[0] = 1.0
    v = e1 - mu
    norm = np.linalg.norm(v)
    if norm < 1e-14:
        return samples
    v /= norm
    return samples - 2.0 * np.outer(samples @ v, v)


def sample_vmf(params: VmfParams, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Exact vMF draws via the tangent-normal rejection scheme.

    Returns shape (size, n), or (n,) when size is None.
    """
    m = 1 if size is None else int(size)
    n, kappa, mu = params.n, params.kappa, params.mu
    d = n - 1
    b = (-2.0 * kappa + math.sqrt(4.0 * kappa**2 + d * d)) / d
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + d * math.log(1.0 - x0 * x0)

    t = np.empty(m)
    filled = 0
    proposals = 0
    while filled < m:
        batch = max(2 * (m - filled), 16)
        proposals += batch
        if proposals > _MAX_PROPOSALS * m:
            raise RuntimeError("vMF rejection sampler exceeded the proposal cap")
        z = rng.beta(0.5 * d, 0.5 * d, size=batch)
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        logu = np.log(rng.uniform(size=batch))
        keep = w[kappa * w + d * np.log1p(-x0 * w) - c >= logu]
        take = min(len(keep), m - filled)
        t[filled:filled + take] = keep[:take]
        filled += take

    tangent = rng.standard_normal((m, d))
    norms = np.linalg.norm(tangent, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    tangent /= norms
    radial = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    samples = np.concatenate([t[:, None], radial[:, None] * tangent], axis=1)
    samples = _householder_to(mu, samples)
    return samples[0] if size is None else samples


def sample_uniform_sphere(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform draws on the unit sphere in R^n."""
    m = 1 if size is None else int(size)
    g = rng.standard_normal((m, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    g /= norms
    return g[0] if size is None else g

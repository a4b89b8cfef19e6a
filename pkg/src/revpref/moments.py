"""Known-concentration estimation of the mean direction via designed
budget constraints and inversion of the marginal positive-sign
probability P(u_i > 0 | mu_i)."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from revpref.knapsack import SENTINEL_PRICE
from revpref.vmf import bessel_i, bessel_i_ratio

QUAD_TOL = 1e-8
QUAD_MAX_DEPTH = 30
INVERT_TOL = 1e-8


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge within the depth budget."""


def _adaptive_simpson(f, a, b, tol=QUAD_TOL, max_depth=QUAD_MAX_DEPTH):
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, m, fm, b, fb, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        if abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        if depth >= max_depth:
            raise QuadratureError("adaptive Simpson exceeded maximum recursion depth")
        return (recurse(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1)
                + recurse(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1))

    return recurse(a, fa, m, fm, b, fb, whole, tol, 0)


def marginal_positive_prob(mu_i: float, kappa: float, n: int) -> float:
    """P(u_i > 0) for a vMF draw u with mean direction having i-th
    coordinate mu_i, evaluated by adaptive Simpson quadrature.

    The Bessel factor enters through I_nu(z)/z^nu, which stays finite as
    the mean coordinate approaches +-1.
    """
    if not -1.0 <= mu_i <= 1.0:
        raise ValueError("mu_i must lie in [-1, 1]")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if n < 2:
        raise ValueError("n must be at least 2")
    nu = 0.5 * (n - 3)
    sin_phi = math.sqrt(max(1.0 - mu_i * mu_i, 0.0))
    cos_phi = mu_i
    denom = bessel_i(0.5 * n - 1.0, kappa)
    pref = math.sqrt(kappa / (2.0 * math.pi)) / denom

    def integrand(psi):
        s = math.sin(psi)
        if s <= 0.0:
            # psi -> 0 limit; nonzero only for n = 2 where the sine powers cancel
            return 0.0 if n != 2 else kappa**nu * bessel_i_ratio(nu, 0.0) * math.exp(kappa * cos_phi)
        return (s ** (0.5 * (n - 1)) * (kappa * s) ** nu
                * bessel_i_ratio(nu, kappa * sin_phi * s)
                * math.exp(kappa * cos_phi * math.cos(psi)))

    return pref * _adaptive_simpson(integrand, 0.0, 0.5 * math.pi)


def invert_marginal(p_hat: float, kappa: float, n: int) -> float:
    """Invert the strictly increasing map mu_i -> P(u_i > 0 | mu_i) by
    bisection; probabilities outside the attainable range clamp to +-1."""
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError("p_hat must lie in [0, 1]")
    if p_hat == 0.5:
        return 0.0  # exact by antipodal symmetry
    lo, hi = -1.0, 1.0
    p_lo = marginal_positive_prob(lo, kappa, n)
    p_hi = marginal_positive_prob(hi, kappa, n)
    if p_hat <= p_lo:
        return -1.0
    if p_hat >= p_hi:
        return 1.0
    while hi - lo > INVERT_TOL:
        mid = 0.5 * (lo + hi)
        if marginal_positive_prob(mid, kappa, n) < p_hat:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class MarginalTable:
    """Cached grid of (mu_i, P(u_i > 0 | mu_i)) values for fixed (n, kappa)."""

    n: int
    kappa: float
    grid: tuple

    def __post_init__(self):
        grid = tuple((float(m), float(p)) for m, p in self.grid)
        ps = [p for _, p in grid]
        if any(not 0.0 < p < 1.0 for p in ps):
            raise ValueError("probabilities must lie strictly in (0, 1)")
        if any(p2 <= p1 for p1, p2 in zip(ps, ps[1:])):
            raise ValueError("probabilities must be strictly increasing along the grid")
        object.__setattr__(self, "grid", grid)

    @classmethod
    def build(cls, n: int, kappa: float, points: int = 41) -> "MarginalTable":
        mus = np.linspace(-1.0, 1.0, points)
        return cls(n=n, kappa=kappa, grid=tuple((m, marginal_positive_prob(m, kappa, n)) for m in mus))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mu", "p"])
            for m, p in self.grid:
                writer.writerow([repr(m), repr(p)])

    @classmethod
    def from_csv(cls, path, n: int, kappa: float) -> "MarginalTable":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            grid = tuple((float(row["mu"]), float(row["p"])) for row in reader)
        return cls(n=n, kappa=kappa, grid=grid)


def design_full(n: int):
    """Unit prices with budget n: the observed bundle reveals sign(u_i)."""
    if n < 1:
        raise ValueError("n must be positive")
    return np.ones(n), float(n)


def design_budgeted(n: int, b_lower: float):
    """Block designs for budgets only known to be at least b_lower.

    Partitions the coordinates into blocks of at most ceil(b_lower)
    items; each design prices the block at 1 and everything else at the
    unbuyable sentinel, so within-block purchase signs are revealed
    whenever the realized budget is at least b_lower.
    """
    if b_lower < 1:
        raise ValueError("b_lower must be at least 1")
    size = math.ceil(b_lower)
    designs = []
    for start in range(0, n, size):
        block = list(range(start, min(start + size, n)))
        a = np.full(n, SENTINEL_PRICE)
        a[block] = 1.0
        designs.append((a, block))
    return designs


def estimate_mu(block_data, kappa: float, n: int) -> np.ndarray:
    """Estimate the mean direction from per-block purchase frequencies.

    block_data is a list of (block_indices, X) pairs where X stacks the
    observed bundles for that block's design.  Each coordinate's purchase
    frequency is inverted through the marginal map, then the result is
    renormalized to the unit sphere.
    """
    p_hat = np.full(n, np.nan)
    for block, X in block_data:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[0] < 1:
            raise ValueError("each block needs at least one observation")
        freqs = np.mean(X > 1e-9, axis=0)
        for i in block:
            p_hat[i] = freqs[i]
    missing = np.nonzero(np.isnan(p_hat))[0]
    if len(missing):
        raise ValueError(f"coordinates never observed in any block: {missing.tolist()}")
    mu_hat = np.array([invert_marginal(p, kappa, n) for p in p_hat])
    norm = np.linalg.norm(mu_hat)
    if norm < 1e-12:
        warnings.warn("degenerate estimate (all frequencies ~1/2); returning e_1")
        mu_hat = np.zeros(n)
        mu_hat[0] = 1.0
        return mu_hat
    return mu_hat / norm

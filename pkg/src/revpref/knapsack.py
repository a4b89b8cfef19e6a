"""Forward model: the single-budget continuous knapsack solved in closed form.

The solver fills items greedily by utility-to-price ratio.  Items with
non-positive utility are never purchased, even when the budget is slack,
so every instance has one canonical optimal bundle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Prices at or above this sentinel mark an item as unbuyable; the solver
# short-circuits such items to x_i = 0 (used by the designed-constraint
# estimators to encode "infinite" prices while keeping inputs numeric).
SENTINEL_PRICE = 1e9

TOL_FEAS = 1e-9
TOL_NUM = 1e-9


class InfeasibleBundleError(ValueError):
    """A bundle violates the box or budget constraints of its instance."""


@dataclass(frozen=True)
class Instance:
    """One knapsack instance: utilities u, prices a, budget b."""

    u: np.ndarray
    a: np.ndarray
    b: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        a = np.asarray(self.a, dtype=float)
        if u.ndim != 1 or a.ndim != 1 or len(u) != len(a):
            raise ValueError(f"dimension mismatch: len(u)={u.shape}, len(a)={a.shape}")
        if not np.all(a > 0):
            raise ValueError("all prices must be strictly positive")
        if self.b < 0:
            raise ValueError(f"negative budget: {self.b}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    @property
    def n(self) -> int:
        return len(self.u)


@dataclass(frozen=True)
class Bundle:
    """A purchase vector with coordinates in [0, 1]."""

    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1:
            raise ValueError("bundle must be a vector")
        if np.any(x < -TOL_FEAS) or np.any(x > 1 + TOL_FEAS):
            raise ValueError("bundle coordinates must lie in [0, 1]")
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class SolveOutcome:
    """Solver output plus the quantities cached for set construction.

    threshold is the marginal ratio at which the budget binds (0 when the
    budget is slack); fractional_index is the single fractional coordinate,
    if any.
    """

    x: Bundle
    value: float
    threshold: float
    fractional_index: int | None


def solve(inst: Instance) -> SolveOutcome:
    """Maximize u.x subject to a.x <= b, 0 <= x <= 1.

    Greedy by descending ratio u_i/a_i over items with u_i > 0; ratio ties
    break by ascending index.  Items with u_i <= 0 (or sentinel price) are
    set to 0.
    """
    u, a, b = inst.u, inst.a, inst.b
    x = np.zeros(inst.n)
    buyable = np.nonzero((u > 0) & (a < SENTINEL_PRICE))[0]
    # stable argsort of negated ratios keeps ascending index on ties
    order = buyable[np.argsort(-u[buyable] / a[buyable], kind="stable")]

    remaining = b
    threshold = 0.0
    fractional_index = None
    purchased_ratios = []
    exhausted = False
    for i in order:
        if a[i] <= remaining + TOL_FEAS:
            x[i] = 1.0
            remaining = max(remaining - a[i], 0.0)
            purchased_ratios.append(u[i] / a[i])
        else:
            frac = remaining / a[i]
            if frac > 0.0:
                x[i] = min(frac, 1.0)
                fractional_index = int(i)
                threshold = u[i] / a[i]
            remaining = 0.0
            exhausted = True
            break
    if fractional_index is None:
        binding = exhausted or (remaining <= TOL_FEAS and bool(purchased_ratios))
        if binding and purchased_ratios:
            # budget binds without a fractional coordinate
            threshold = min(purchased_ratios)

    value = float(u @ x)
    return SolveOutcome(x=Bundle(x), value=value, threshold=threshold, fractional_index=fractional_index)


def solve_batch(u, a, b):
    """Vectorized `solve` over N instances.

    u may be (N, n) or a single (n,) vector broadcast against a (N, n) and
    b (N,).  Returns (X, values) with X of shape (N, n).  Matches the
    greedy solver's conventions (non-positive utilities and sentinel
    prices forced to 0, ties by ascending index).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = np.broadcast_to(u, a.shape)
    if u.shape != a.shape or len(b) != len(a):
        raise ValueError("shape mismatch between u, a, b")

    mask = (u > 0) & (a < SENTINEL_PRICE)
    ratio = np.where(mask, u / a, -np.inf)
    order = np.argsort(-ratio, axis=1, kind="stable")
    a_eff = np.where(mask, a, 0.0)
    a_sorted = np.take_along_axis(a_eff, order, axis=1)
    cum = np.cumsum(a_sorted, axis=1)
    prev = cum - a_sorted
    denom = np.where(a_sorted > 0, a_sorted, 1.0)
    x_sorted = np.clip((b[:, None] - prev) / denom, 0.0, 1.0)
    x_sorted = np.where(a_sorted > 0, x_sorted, 0.0)
    x = np.empty_like(x_sorted)
    np.put_along_axis(x, order, x_sorted, axis=1)
    values = np.einsum("ij,ij->i", u, x)
    return x, values


def is_optimal(x: Bundle, inst: Instance, tol: float = TOL_NUM) -> bool:
    """Definition-level optimality oracle: u.x within tol of the optimum.

    Raises InfeasibleBundleError for infeasible bundles instead of
    returning False.
    """
    xv = x.x if isinstance(x, Bundle) else np.asarray(x, dtype=float)
    if len(xv) != inst.n:
        raise ValueError("dimension mismatch between bundle and instance")
    if np.any(xv < -tol) or np.any(xv > 1 + tol) or inst.a @ xv > inst.b + tol:
        raise InfeasibleBundleError("bundle is infeasible for the instance")
    return bool(inst.u @ xv >= solve(inst).value - tol)

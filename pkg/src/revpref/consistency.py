"""Consistency sets: the unit-sphere regions of utilities that rationalize
an observed bundle, represented as linear inequalities V u <= w.

Rows are stored with unit infinity-norm coefficient vectors so that a
margin subtracted from every right-hand side is comparable across rows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from revpref.knapsack import Bundle, Instance, TOL_FEAS

TOL_ACTIVE = 1e-7
UNIT_TOL = 1e-9


@dataclass(frozen=True)
class Observation:
    """One data record: observed bundle, price vector, budget."""

    x_star: np.ndarray
    a: np.ndarray
    b: float

    def __post_init__(self):
        x = Bundle(self.x_star).x
        inst = Instance(u=np.zeros(len(x)), a=self.a, b=self.b)
        if inst.a @ x > inst.b + TOL_FEAS:
            raise ValueError("observed bundle exceeds the budget")
        object.__setattr__(self, "x_star", x)
        object.__setattr__(self, "a", inst.a)
        object.__setattr__(self, "b", float(self.b))

    @property
    def n(self) -> int:
        return len(self.x_star)


@dataclass(frozen=True)
class ConsistencySet:
    """Linear-inequality representation {u: V u <= w} of a consistency set."""

    V: np.ndarray
    w: np.ndarray
    source: Observation | None = field(default=None, compare=False)

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.V, dtype=float))
        w = np.atleast_1d(np.asarray(self.w, dtype=float))
        if V.shape[0] != len(w):
            raise ValueError("row count mismatch between V and w")
        if not (np.all(np.isfinite(V)) and np.all(np.isfinite(w))):
            raise ValueError("non-finite entries in set representation")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "w", w)

    @property
    def m(self) -> int:
        return self.V.shape[0]


def build_set(obs: Observation, tol_active: float = TOL_ACTIVE, completed: bool = True) -> ConsistencySet:
    """Build the linear rows characterizing utilities consistent with obs.

    Coordinates are classified as purchased (P), fractional (F), or zero
    (Z) within tol_active, and the budget counts as binding when
    |a.x* - b| <= tol_active.  Rows always include the ratio
    nonnegativity constraints on P u F; under a slack budget the zero
    coordinates get nonpositivity rows, and under a binding budget every
    zero coordinate's ratio is dominated by every purchased ratio.

    With completed=True (the default) the representation is tightened to
    match the definition-level optimality oracle when x* has fractional
    coordinates: fractional ratios must be equal to each other, dominated
    by fully-purchased ratios, and zero under a slack budget.  With
    completed=False the literal three-condition row set is built instead.
    """
    x, a, b = obs.x_star, obs.a, obs.b
    n = obs.n
    P = [i for i in range(n) if x[i] >= 1 - tol_active]
    Z = [i for i in range(n) if x[i] <= tol_active]
    F = [i for i in range(n) if tol_active < x[i] < 1 - tol_active]
    binding = abs(a @ x - b) <= tol_active

    rows = []

    def ratio_row(i, sign):
        r = np.zeros(n)
        r[i] = sign / a[i]
        return r

    def diff_row(i, j):
        # u_i / a_i - u_j / a_j <= 0
        r = np.zeros(n)
        r[i] = 1.0 / a[i]
        r[j] = -1.0 / a[j]
        return r

    for i in P + F:
        rows.append(ratio_row(i, -1.0))
    if not binding:
        for i in Z:
            rows.append(ratio_row(i, +1.0))
        if completed:
            for i in F:
                # slack budget forces fractional coordinates to zero utility
                rows.append(ratio_row(i, +1.0))
    else:
        for i in Z:
            for j in P + F:
                rows.append(diff_row(i, j))
        if completed:
            for k, i in enumerate(F):
                for j in F[k + 1:]:
                    rows.append(diff_row(i, j))
                    rows.append(diff_row(j, i))
            for i in F:
                for j in P:
                    rows.append(diff_row(i, j))

    if not rows:
        V = np.zeros((0, n))
        w = np.zeros(0)
    else:
        V = np.array(rows)
        norms = np.max(np.abs(V), axis=1)
        V = V / norms[:, None]
        w = np.zeros(len(rows))
    return ConsistencySet(V=V, w=w, source=obs)


def _check_unit(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
        raise ValueError("u must lie on the unit sphere")
    return u


def contains(cset: ConsistencySet, u, gamma: float = 0.0) -> bool:
    """Membership of a unit vector in the gamma-margin set."""
    u = _check_unit(u)
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if cset.m == 0:
        return True
    if cset.V.shape[1] != len(u):
        raise ValueError("dimension mismatch between set and u")
    return bool(np.all(cset.V @ u <= cset.w - gamma))


def count_consistent(sets, u, gamma: float = 0.0) -> int:
    """Number of gamma-margin sets containing u."""
    return sum(contains(s, u, gamma) for s in sets)


class StackedSets:
    """All rows of a list of consistency sets stacked for vectorized
    membership counting over sample batches.

    Sets are regrouped by row count so that per-set reductions run as
    reshaped max-reductions rather than segment loops.
    """

    _CHUNK_CELLS = 8_000_000  # cap on rows x samples handled per slab

    def __init__(self, sets):
        self.T = len(sets)
        nonempty = sorted(((s.m, i) for i, s in enumerate(sets) if s.m > 0))
        self.nonempty_idx = np.array([i for _, i in nonempty], dtype=np.int64)
        self.n_empty = self.T - len(nonempty)
        if nonempty:
            ordered = [sets[i] for _, i in nonempty]
            self.V = np.concatenate([s.V for s in ordered])
            self.w = np.concatenate([s.w for s in ordered])
            # contiguous groups of sets sharing a row count
            self.groups = []
            row_start = set_start = 0
            for m, group in itertools.groupby(nonempty, key=lambda t: t[0]):
                size = sum(1 for _ in group)
                self.groups.append((m, set_start, size, row_start))
                set_start += size
                row_start += m * size
        else:
            self.V = None

    def inside_matrix(self, U: np.ndarray, gamma: float = 0.0) -> np.ndarray:
        """Boolean (T_nonempty, M) membership of the rows of U (M, n),
        ordered as self.nonempty_idx."""
        M = U.shape[0]
        n_sets = len(self.nonempty_idx)
        total_rows = self.V.shape[0]
        out = np.empty((n_sets, M), dtype=bool)
        cols = max(1, min(M, self._CHUNK_CELLS // total_rows))
        thr = (self.w - gamma)[:, None]
        Ut = np.ascontiguousarray(U.T)
        for lo in range(0, M, cols):
            hi = min(lo + cols, M)
            ok = self.V @ Ut[:, lo:hi] <= thr
            for m, set_start, size, row_start in self.groups:
                block = ok[row_start:row_start + m * size].reshape(size, m, hi - lo)
                out[set_start:set_start + size, lo:hi] = block.all(axis=1)
        return out

    def counts_per_set(self, U: np.ndarray, gamma: float = 0.0) -> np.ndarray:
        """For each set, how many of the M sample rows of U it contains.

        Sets with no rows (whole sphere) count every sample."""
        M = U.shape[0]
        out = np.full(self.T, M, dtype=np.int64)
        if self.V is not None:
            out[self.nonempty_idx] = self.inside_matrix(U, gamma).sum(axis=1)
        return out

    def count_containing(self, u: np.ndarray, gamma: float = 0.0) -> int:
        """Number of sets whose gamma-margin version contains the single u."""
        total = self.n_empty
        if self.V is not None:
            total += int(self.inside_matrix(np.asarray(u)[None, :], gamma).sum())
        return total

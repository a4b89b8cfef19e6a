"""Simulated annealing over the unit sphere for the margin consistency
count: find a utility direction inside as many gamma-margin sets as
possible."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from revpref.consistency import StackedSets
from revpref.vmf import sample_uniform_sphere


def default_gamma(n: int, T: int) -> float:
    """Margin choice 1 / (4 n^2 T^{1/4})."""
    if n < 1 or T < 1:
        raise ValueError("n and T must be positive")
    return 1.0 / (4.0 * n * n * T**0.25)


def default_sigma_u(n: int) -> float:
    return 0.3 / math.sqrt(n)


@dataclass(frozen=True)
class SaConfig:
    K: int = 1000
    eta0: float = 1.0
    c: float = 0.9
    tau: int = 25
    gamma: float = 0.0
    sigma_u: float | None = None
    init_candidates: int = 64

    def __post_init__(self):
        if self.K < 0 or self.tau < 1 or not (0 < self.c < 1) or self.eta0 <= 0 or self.gamma < 0:
            raise ValueError("invalid annealing configuration")
        if self.init_candidates < 1:
            raise ValueError("init_candidates must be at least 1")


@dataclass
class TracePoint:
    step: int
    objective: int
    best_objective: int
    eta: float
    accepted: bool


@dataclass
class SaState:
    u: np.ndarray
    objective: int
    eta: float
    best_u: np.ndarray
    best_objective: int
    step_index: int = 0
    trace: list[TracePoint] = field(default_factory=list)


def _init_state(stacked: StackedSets, config: SaConfig, rng: np.random.Generator, n: int) -> SaState:
    # Start from the best of a small uniform candidate batch.  A single
    # uniform start occasionally lands on a flat low-count plateau that the
    # cooling schedule cannot escape; screening removes that failure mode.
    cands = sample_uniform_sphere(n, rng, size=config.init_candidates)
    if config.init_candidates == 1:
        u0 = cands[0] if cands.ndim == 2 else cands
        obj0 = stacked.count_containing(u0, config.gamma)
    else:
        objs = stacked.n_empty + (stacked.inside_matrix(cands, config.gamma).sum(axis=0)
                                  if stacked.V is not None else 0)
        best = int(np.argmax(objs))
        u0, obj0 = cands[best], int(np.atleast_1d(objs)[best])
    return SaState(u=u0, objective=obj0, eta=config.eta0, best_u=u0, best_objective=obj0,
                   trace=[TracePoint(0, obj0, obj0, config.eta0, True)])


def sa_step(state: SaState, stacked: StackedSets, config: SaConfig, rng: np.random.Generator) -> SaState:
    """One annealing step: temperature cut every tau steps, Gaussian jitter
    proposal renormalized to the sphere, Metropolis acceptance on the
    count difference, incumbent tracking."""
    k = state.step_index + 1
    eta = state.eta * config.c if k % config.tau == 0 else state.eta

    sigma = config.sigma_u if config.sigma_u is not None else default_sigma_u(len(state.u))
    while True:
        u_new = state.u + sigma * rng.standard_normal(len(state.u))
        norm = np.linalg.norm(u_new)
        if norm > 0:
            break
    u_new /= norm

    obj_new = stacked.count_containing(u_new, config.gamma)
    delta = obj_new - state.objective
    accepted = delta >= 0 or rng.uniform() < math.exp(delta / eta)
    u, obj = (u_new, obj_new) if accepted else (state.u, state.objective)
    best_u, best_obj = (u, obj) if obj > state.best_objective else (state.best_u, state.best_objective)
    state.trace.append(TracePoint(k, obj, best_obj, eta, bool(accepted)))
    return SaState(u=u, objective=obj, eta=eta, best_u=best_u, best_objective=best_obj,
                   step_index=k, trace=state.trace)


def run_sa(sets, config: SaConfig, seed: int | None = None, n: int | None = None,
           return_final: bool = False):
    """Run K annealing steps; returns (u_hat, trace).

    u_hat is the incumbent best by default; return_final=True yields the
    literal last iterate instead.
    """
    stacked = sets if isinstance(sets, StackedSets) else StackedSets(list(sets))
    if n is None:
        if stacked.V is None:
            raise ValueError("dimension n required when all sets are empty")
        n = stacked.V.shape[1]
    rng = np.random.default_rng(seed)
    state = _init_state(stacked, config, rng, n)
    for _ in range(config.K):
        state = sa_step(state, stacked, config, rng)
    u_hat = state.u if return_final else state.best_u
    return u_hat, state.trace


def export_trace(trace, path) -> None:
    """CSV trace: step, objective, best_objective, eta, accepted."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "objective", "best_objective", "eta", "accepted"])
        for p in trace:
            writer.writerow([p.step, p.objective, p.best_objective, repr(p.eta), int(p.accepted)])

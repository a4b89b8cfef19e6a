"""Estimation of stochastic linear utilities from observed purchase bundles.

Subpackages cover the forward knapsack model, consistency-set geometry,
von Mises-Fisher machinery, posterior sampling, simulated annealing,
known-concentration moment matching, evaluation metrics, and the
experiment harness.
"""

from revpref.knapsack import Instance, Bundle, SolveOutcome, solve, solve_batch, is_optimal
from revpref.consistency import Observation, ConsistencySet, StackedSets, build_set, contains, count_consistent
from revpref.vmf import VmfParams, bessel_i, log_bessel_i, log_norm_const, log_density, sample_vmf
from revpref.posterior import PriorBox, ChainState, run_chain
from revpref.annealing import SaConfig, default_gamma, run_sa
from revpref.moments import (
    MarginalTable,
    marginal_positive_prob,
    invert_marginal,
    design_full,
    design_budgeted,
    estimate_mu,
)
from revpref.evaluation import Scenario, VmfLaw, CorruptionLaw, acc, gaussian_pred_accuracy, coupled_mismatch

__all__ = [
    "Instance", "Bundle", "SolveOutcome", "solve", "solve_batch", "is_optimal",
    "Observation", "ConsistencySet", "StackedSets", "build_set", "contains", "count_consistent",
    "VmfParams", "bessel_i", "log_bessel_i", "log_norm_const", "log_density", "sample_vmf",
    "PriorBox", "ChainState", "run_chain",
    "SaConfig", "default_gamma", "run_sa",
    "MarginalTable", "marginal_positive_prob", "invert_marginal",
    "design_full", "design_budgeted", "estimate_mu",
    "Scenario", "VmfLaw", "CorruptionLaw", "acc", "gaussian_pred_accuracy", "coupled_mismatch",
]

"""Experiment harness: seeded trial execution, scenario truth sampling,
metric computation, and the benchmark-table reproduction grid."""

from __future__ import annotations

import csv
import hashlib
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from revpref.annealing import SaConfig, default_gamma, run_sa
from revpref.consistency import build_set
from revpref.datasets import generate_observations
from revpref.evaluation import (
    CorruptionLaw,
    Scenario,
    VmfLaw,
    acc,
    coupled_mismatch,
    gaussian_pred_accuracy,
    theta_distance,
)
from revpref.knapsack import solve_batch
from revpref.moments import design_full, estimate_mu
from revpref.posterior import PriorBox, posterior_mean_mu, run_chain
from revpref.vmf import VmfParams, sample_uniform_sphere, sample_vmf

ALGORITHMS = ("gaussian_mcmc", "corruption_sa", "moment_match")
SETTING_LABEL = {"gaussian_mcmc": "gaussian", "corruption_sa": "delta_corr", "moment_match": "moment"}
RESULT_COLUMNS = ["setting", "scenario", "n", "T", "trial", "metric"]


def derive_seed(master_seed: int, trial: int, tag: str) -> int:
    """Stable per-(trial, stage) seed; no stream is reused across stages."""
    digest = hashlib.sha256(f"{master_seed}|{trial}|{tag}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def stage_rng(master_seed: int, trial: int, tag: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, trial, tag))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to rerun one experiment cell deterministically."""

    algorithm: str = "gaussian_mcmc"
    ab_law: str = "uniform_i"
    n: int = 3
    T: int = 200
    trials: int = 20
    master_seed: int = 0
    # truth laws
    delta: float = 0.1
    kappa_star_range: tuple = (1.0, 10.0)
    kappa_known: float = 5.0
    # posterior sampler
    K: int = 1000
    M: int = 1024
    sigma_mu: float | None = None
    sigma_kappa: float | None = None
    kappa_lo: float = 0.5
    kappa_hi: float = 20.0
    estimate: str = "posterior_mean"  # or "final"
    # annealing
    eta0: float = 1.0
    c: float = 0.9
    tau: int = 25
    gamma: object = "auto"
    sigma_u: float | None = None
    # evaluation
    N_eval: int = 100_000
    output: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.trials < 1 or self.T < 1:
            raise ValueError("trials and T must be positive")

    def resolved_gamma(self) -> float:
        if self.gamma == "auto":
            return default_gamma(self.n, self.T)
        return float(self.gamma)


def _draw_gaussian_truth(config: ExperimentConfig, rng) -> VmfParams:
    lo, hi = config.kappa_star_range
    return VmfParams(mu=sample_uniform_sphere(config.n, rng), kappa=rng.uniform(lo, hi))


def run_gaussian_trial(config: ExperimentConfig, trial: int) -> float:
    theta_star = _draw_gaussian_truth(config, stage_rng(config.master_seed, trial, "truth"))
    scenario = Scenario(n=config.n, ab_law=config.ab_law,
                        utility_law=VmfLaw(mu=theta_star.mu, kappa=theta_star.kappa))
    obs, _ = generate_observations(scenario, config.T, stage_rng(config.master_seed, trial, "data"))
    sets = [build_set(o) for o in obs]
    state = run_chain(sets, K=config.K, M=config.M, sigma_mu=config.sigma_mu,
                      sigma_kappa=config.sigma_kappa,
                      prior=PriorBox(config.kappa_lo, config.kappa_hi),
                      seed=derive_seed(config.master_seed, trial, "chain"), n=config.n)
    mu_hat = state.theta.mu if config.estimate == "final" else posterior_mean_mu(state)
    return gaussian_pred_accuracy(mu_hat, theta_star.mu, scenario, config.N_eval,
                                  stage_rng(config.master_seed, trial, "eval"))


def run_corruption_trial(config: ExperimentConfig, trial: int) -> float:
    rng_truth = stage_rng(config.master_seed, trial, "truth")
    u_star = sample_uniform_sphere(config.n, rng_truth)
    scenario = Scenario(n=config.n, ab_law=config.ab_law,
                        utility_law=CorruptionLaw(u_star=u_star, delta=config.delta))
    obs, _ = generate_observations(scenario, config.T, stage_rng(config.master_seed, trial, "data"))
    sets = [build_set(o) for o in obs]
    sa_config = SaConfig(K=config.K, eta0=config.eta0, c=config.c, tau=config.tau,
                         gamma=config.resolved_gamma(), sigma_u=config.sigma_u)
    u_hat, _ = run_sa(sets, sa_config, seed=derive_seed(config.master_seed, trial, "sa"), n=config.n)
    rng_eval = stage_rng(config.master_seed, trial, "eval")
    acc_hat = acc(u_hat, scenario, config.N_eval, rng_eval)
    acc_star = acc(u_star, scenario, config.N_eval, rng_eval)
    return acc_hat / acc_star if acc_star > 0 else math.nan


def run_moment_trial(config: ExperimentConfig, trial: int) -> float:
    """Known-concentration moment matching on the sign-revealing design;
    the metric is the estimation error |mu_hat - mu*|_2 (lower is better)."""
    rng_truth = stage_rng(config.master_seed, trial, "truth")
    mu_star = sample_uniform_sphere(config.n, rng_truth)
    theta = VmfParams(mu=mu_star, kappa=config.kappa_known)
    rng_data = stage_rng(config.master_seed, trial, "data")
    U = sample_vmf(theta, rng_data, size=config.T)
    a, b = design_full(config.n)
    X, _ = solve_batch(U, np.tile(a, (config.T, 1)), np.full(config.T, b))
    mu_hat = estimate_mu([(list(range(config.n)), X)], config.kappa_known, config.n)
    return float(np.linalg.norm(mu_hat - mu_star))


_TRIAL_RUNNERS = {
    "gaussian_mcmc": run_gaussian_trial,
    "corruption_sa": run_corruption_trial,
    "moment_match": run_moment_trial,
}


def run_experiment(config: ExperimentConfig):
    """Run all trials of one cell; returns (rows, timing_rows).

    Estimator failures are recorded as NaN metrics, not raised.
    """
    rows, timing = [], []
    runner = _TRIAL_RUNNERS[config.algorithm]
    label = SETTING_LABEL[config.algorithm]
    for trial in range(config.trials):
        start = time.perf_counter()
        try:
            metric = runner(config, trial)
        except Exception as exc:  # per-trial failures are not fatal to the batch
            metric = math.nan
            timing.append({"setting": label, "scenario": config.ab_law, "n": config.n,
                           "T": config.T, "trial": trial, "error": repr(exc)})
        wall_ms = 1000.0 * (time.perf_counter() - start)
        rows.append({"setting": label, "scenario": config.ab_law, "n": config.n,
                     "T": config.T, "trial": trial, "metric": metric})
        timing.append({"setting": label, "scenario": config.ab_law, "n": config.n,
                       "T": config.T, "trial": trial, "wall_ms": wall_ms})
    if config.output:
        write_results_csv(config.output, rows)
    return rows, timing


def write_results_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([row["setting"], row["scenario"], row["n"], row["T"],
                             row["trial"], repr(float(row["metric"]))])


TABLE1_SCALES = {
    # trial counts and sizes per scale; n=25 only at full scale
    "smoke": dict(n_list=(3,), trials=3, T=60, K=150, M=256, N_eval=2000),
    "desk": dict(n_list=(3, 5), trials=20, T=200, K=1000, M=1024, N_eval=100_000),
    "full": dict(n_list=(3, 5, 10, 25), trials=20, T=200, K=1000, M=1024, N_eval=100_000),
}


def reproduce_table1(output_path, scale: str = "desk", master_seed: int = 0,
                     progress=None) -> list:
    """Run the 2 settings x 3 scenarios x n grid and write summary and
    per-trial CSVs.  Partial results are flushed row by row, so an
    interrupt leaves a readable file.  Timing goes to a separate sidecar
    because wall clocks are not reproducible.
    """
    if scale not in TABLE1_SCALES:
        raise ValueError(f"unknown scale {scale!r}")
    params = TABLE1_SCALES[scale]
    output_path = Path(output_path)
    trials_path = output_path.with_name(output_path.stem + "_trials.csv")
    timing_path = output_path.with_name(output_path.stem + "_timing.csv")

    summaries = []
    with open(output_path, "w", newline="") as summary_fh, \
            open(trials_path, "w", newline="") as trials_fh, \
            open(timing_path, "w", newline="") as timing_fh:
        summary_writer = csv.writer(summary_fh)
        summary_writer.writerow(["setting", "scenario", "n", "T", "trials", "mean", "stderr"])
        trials_writer = csv.writer(trials_fh)
        trials_writer.writerow(RESULT_COLUMNS)
        timing_writer = csv.writer(timing_fh)
        timing_writer.writerow(["setting", "scenario", "n", "cell_wall_ms"])

        for algorithm in ("gaussian_mcmc", "corruption_sa"):
            for ab_law in ("uniform_i", "discrete_ii", "fixed_a_iii"):
                for n in params["n_list"]:
                    config = ExperimentConfig(
                        algorithm=algorithm, ab_law=ab_law, n=n,
                        T=params["T"], trials=params["trials"], master_seed=master_seed,
                        K=params["K"], M=params["M"], N_eval=params["N_eval"],
                    )
                    start = time.perf_counter()
                    rows, _ = run_experiment(config)
                    wall_ms = 1000.0 * (time.perf_counter() - start)
                    for row in rows:
                        trials_writer.writerow([row["setting"], row["scenario"], row["n"],
                                                row["T"], row["trial"], repr(float(row["metric"]))])
                    trials_fh.flush()
                    metrics = np.array([r["metric"] for r in rows], dtype=float)
                    good = metrics[~np.isnan(metrics)]
                    mean = float(np.mean(good)) if len(good) else math.nan
                    stderr = float(np.std(good, ddof=1) / math.sqrt(len(good))) if len(good) > 1 else math.nan
                    summary = {"setting": SETTING_LABEL[algorithm], "scenario": ab_law, "n": n,
                               "T": config.T, "trials": config.trials, "mean": mean, "stderr": stderr}
                    summaries.append(summary)
                    summary_writer.writerow([summary["setting"], summary["scenario"], n, config.T,
                                             config.trials, repr(mean), repr(stderr)])
                    summary_fh.flush()
                    timing_writer.writerow([SETTING_LABEL[algorithm], ab_law, n, repr(wall_ms)])
                    timing_fh.flush()
                    if progress is not None:
                        progress(summary)
    return summaries


def distance_mismatch_curve(n: int = 5, ab_law: str = "uniform_i", distances=None,
                            N: int = 20_000, seed: int = 0, kappa_star: float = 5.0):
    """Coupled-mismatch estimates along a curve of parameters at chosen
    distances from a reference; includes a distance-0 baseline row.

    Returns rows of (distance, mismatch, stderr).
    """
    distances = list(distances) if distances is not None else [0.1 * k for k in range(1, 11)]
    rng = np.random.default_rng(seed)
    mu_star = sample_uniform_sphere(n, rng)
    theta_star = VmfParams(mu=mu_star, kappa=kappa_star)
    scenario = Scenario(n=n, ab_law=ab_law)
    # orthonormal direction for the geodesic perturbation of the mean
    raw = rng.standard_normal(n)
    v = raw - (raw @ mu_star) * mu_star
    v /= np.linalg.norm(v)

    rows = []
    baseline = coupled_mismatch(theta_star, theta_star, scenario, N, rng)
    rows.append({"distance": 0.0, "mismatch": baseline, "stderr": _binomial_stderr(baseline, N)})
    for d in distances:
        alpha = 2.0 * math.asin(min(d / 2.0, 1.0))
        mu_d = math.cos(alpha) * mu_star + math.sin(alpha) * v
        theta_d = VmfParams(mu=mu_d / np.linalg.norm(mu_d), kappa=kappa_star)
        p = coupled_mismatch(theta_d, theta_star, scenario, N, rng)
        rows.append({"distance": theta_distance(theta_d, theta_star),
                     "mismatch": p, "stderr": _binomial_stderr(p, N)})
    return rows


def _binomial_stderr(p: float, N: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / N)


def write_distance_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["distance", "mismatch", "stderr"])
        for row in rows:
            writer.writerow([repr(row["distance"]), repr(row["mismatch"]), repr(row["stderr"])])

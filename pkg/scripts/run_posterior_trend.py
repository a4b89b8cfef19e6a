#!/usr/bin/env python3
"""Posterior estimation error as the sample count T grows: the empirical
shadow of posterior concentration.

Usage: python scripts/run_posterior_trend.py --out results/trend.csv
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from revpref.consistency import build_set
from revpref.datasets import generate_observations
from revpref.evaluation import Scenario, VmfLaw
from revpref.experiments import derive_seed, stage_rng
from revpref.posterior import PriorBox, posterior_mean_mu, run_chain
from revpref.vmf import sample_uniform_sphere


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/trend.csv")
    parser.add_argument("--n", type=int, default=3)
    parser.add_argument("--T", type=int, nargs="+", default=[50, 200, 800])
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--K", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["T", "trial", "error"])
        for trial in range(args.trials):
            rng = stage_rng(args.seed, trial, "truth")
            mu_star = sample_uniform_sphere(args.n, rng)
            kappa_star = rng.uniform(1.0, 10.0)
            scenario = Scenario(n=args.n, ab_law="uniform_i",
                                utility_law=VmfLaw(mu=mu_star, kappa=kappa_star))
            for T in args.T:
                obs, _ = generate_observations(scenario, T,
                                               stage_rng(args.seed, trial, f"data{T}"))
                sets = [build_set(o) for o in obs]
                state = run_chain(sets, K=args.K, prior=PriorBox(0.5, 20.0),
                                  seed=derive_seed(args.seed, trial, f"chain{T}"),
                                  n=args.n)
                err = float(np.linalg.norm(posterior_mean_mu(state) - mu_star))
                writer.writerow([T, trial, repr(err)])
                fh.flush()
                print(f"trial={trial} T={T} error={err:.4f}", flush=True)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

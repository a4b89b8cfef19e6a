"""Command-line interface.

Subcommands: generate, estimate-gaussian, estimate-corruption,
estimate-moment, evaluate, reproduce-table1, diagnose-distance.
Options can also come from a JSON key-value config file via --config;
explicit flags win over config values.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from revpref import annealing, posterior
from revpref.annealing import SaConfig, default_gamma, run_sa
from revpref.consistency import build_set
from revpref.datasets import (
    DatasetHeader,
    generate_observations,
    read_dataset,
    scenario_descriptor,
    write_dataset,
    write_dataset_csv,
)
from revpref.evaluation import CorruptionLaw, Scenario, VmfLaw, acc, gaussian_pred_accuracy
from revpref.experiments import (
    derive_seed,
    distance_mismatch_curve,
    reproduce_table1,
    write_distance_csv,
)
from revpref.knapsack import SENTINEL_PRICE
from revpref.moments import estimate_mu
from revpref.posterior import PriorBox, posterior_mean_kappa, posterior_mean_mu, run_chain
from revpref.vmf import sample_uniform_sphere


def _apply_config(parser: argparse.ArgumentParser, argv):
    """Pre-read --config and install its keys as parser defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config:
        with open(known.config) as fh:
            parser.set_defaults(**json.load(fh))
    return parser.parse_args(argv)


def _add_common(parser):
    parser.add_argument("--config", default=None, help="JSON config file; flags win")
    parser.add_argument("--seed", type=int, required=True, help="master seed (required for reproduction)")


def cmd_generate(argv):
    parser = argparse.ArgumentParser(prog="revpref generate")
    _add_common(parser)
    parser.add_argument("--n", type=int, default=3)
    parser.add_argument("--ab-law", default="uniform_i", choices=["uniform_i", "discrete_ii", "fixed_a_iii"])
    parser.add_argument("--utility", default="vmf", choices=["vmf", "delta"])
    parser.add_argument("--kappa", type=float, default=5.0, help="vMF concentration of the truth")
    parser.add_argument("--delta", type=float, default=0.1, help="corruption probability")
    parser.add_argument("--T", type=int, default=200)
    parser.add_argument("--out", required=True)
    parser.add_argument("--csv", action="store_true", help="also write a CSV copy next to the dataset")
    args = _apply_config(parser, argv)

    rng_truth = np.random.default_rng(derive_seed(args.seed, 0, "truth"))
    direction = sample_uniform_sphere(args.n, rng_truth)
    if args.utility == "vmf":
        law = VmfLaw(mu=direction, kappa=args.kappa)
        truth = {"law": "vmf", "mu": direction.tolist(), "kappa": args.kappa}
    else:
        law = CorruptionLaw(u_star=direction, delta=args.delta)
        truth = {"law": "delta", "u_star": direction.tolist(), "delta": args.delta}
    scenario = Scenario(n=args.n, ab_law=args.ab_law, utility_law=law)
    obs, utilities = generate_observations(scenario, args.T, np.random.default_rng(derive_seed(args.seed, 0, "data")))
    header = DatasetHeader(n=args.n, scenario=scenario_descriptor(scenario), seed=args.seed)
    write_dataset(args.out, obs, header, utilities=utilities)
    with open(args.out + ".truth.json", "w") as fh:
        json.dump({**truth, "ab_law": args.ab_law, "n": args.n}, fh, sort_keys=True)
    if args.csv:
        write_dataset_csv(args.out + ".csv", obs, header)
    print(f"wrote {args.T} observations to {args.out}")
    return 0


def cmd_estimate_gaussian(argv):
    parser = argparse.ArgumentParser(prog="revpref estimate-gaussian")
    _add_common(parser)
    parser.add_argument("--data", required=True)
    parser.add_argument("--K", type=int, default=1000)
    parser.add_argument("--M", type=int, default=1024)
    parser.add_argument("--kappa-lo", type=float, default=0.5)
    parser.add_argument("--kappa-hi", type=float, default=20.0)
    parser.add_argument("--estimate", default="posterior_mean", choices=["posterior_mean", "final"])
    parser.add_argument("--trace", default=None, help="CSV path for the chain trace")
    parser.add_argument("--out", default=None, help="JSON path for the estimate")
    args = _apply_config(parser, argv)

    header, obs = read_dataset(args.data)
    sets = [build_set(o) for o in obs]
    state = run_chain(sets, K=args.K, M=args.M, prior=PriorBox(args.kappa_lo, args.kappa_hi),
                      seed=args.seed, n=header.n)
    if args.estimate == "final":
        mu_hat, kappa_hat = state.theta.mu, state.theta.kappa
    else:
        mu_hat, kappa_hat = posterior_mean_mu(state), posterior_mean_kappa(state)
    if args.trace:
        posterior.export_trace(state, args.trace)
    result = {"mu": mu_hat.tolist(), "kappa": kappa_hat, "estimate": args.estimate}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(result, fh, sort_keys=True)
    print(json.dumps(result))
    return 0


def cmd_estimate_corruption(argv):
    parser = argparse.ArgumentParser(prog="revpref estimate-corruption")
    _add_common(parser)
    parser.add_argument("--data", required=True)
    parser.add_argument("--K", type=int, default=1000)
    parser.add_argument("--gamma", default="auto")
    parser.add_argument("--eta0", type=float, default=1.0)
    parser.add_argument("--c", type=float, default=0.9)
    parser.add_argument("--tau", type=int, default=25)
    parser.add_argument("--trace", default=None)
    parser.add_argument("--out", default=None)
    args = _apply_config(parser, argv)

    header, obs = read_dataset(args.data)
    sets = [build_set(o) for o in obs]
    gamma = default_gamma(header.n, len(obs)) if args.gamma == "auto" else float(args.gamma)
    config = SaConfig(K=args.K, eta0=args.eta0, c=args.c, tau=args.tau, gamma=gamma)
    u_hat, trace = run_sa(sets, config, seed=args.seed, n=header.n)
    if args.trace:
        annealing.export_trace(trace, args.trace)
    result = {"u": u_hat.tolist(), "gamma": gamma, "best_objective": trace[-1].best_objective}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(result, fh, sort_keys=True)
    print(json.dumps(result))
    return 0


def cmd_estimate_moment(argv):
    parser = argparse.ArgumentParser(prog="revpref estimate-moment")
    _add_common(parser)
    parser.add_argument("--data", required=True)
    parser.add_argument("--kappa", type=float, required=True, help="known concentration")
    parser.add_argument("--out", default=None)
    args = _apply_config(parser, argv)

    header, obs = read_dataset(args.data)
    n = header.n
    # group observations by which coordinates are actually priced
    # (sentinel-priced coordinates belong to other blocks)
    groups = {}
    for o in obs:
        key = tuple(i for i in range(n) if o.a[i] < SENTINEL_PRICE)
        groups.setdefault(key, []).append(o.x_star)
    block_data = [(list(block), np.array(xs)) for block, xs in groups.items()]
    mu_hat = estimate_mu(block_data, args.kappa, n)
    result = {"mu": mu_hat.tolist(), "kappa": args.kappa}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(result, fh, sort_keys=True)
    print(json.dumps(result))
    return 0


def cmd_evaluate(argv):
    parser = argparse.ArgumentParser(prog="revpref evaluate")
    _add_common(parser)
    parser.add_argument("--estimate", required=True, help="JSON estimate file")
    parser.add_argument("--truth", required=True, help="JSON truth file from generate")
    parser.add_argument("--N", type=int, default=100_000)
    args = _apply_config(parser, argv)

    with open(args.estimate) as fh:
        est = json.load(fh)
    with open(args.truth) as fh:
        truth = json.load(fh)
    rng = np.random.default_rng(args.seed)
    n, ab_law = truth["n"], truth["ab_law"]
    if truth["law"] == "vmf":
        scenario = Scenario(n=n, ab_law=ab_law, utility_law=VmfLaw(mu=np.array(truth["mu"]), kappa=truth["kappa"]))
        mu_hat = np.array(est.get("mu", est.get("u")))
        metric = gaussian_pred_accuracy(mu_hat, np.array(truth["mu"]), scenario, args.N, rng)
        print(json.dumps({"metric": "pred_accuracy", "value": metric}))
    else:
        u_star = np.array(truth["u_star"])
        scenario = Scenario(n=n, ab_law=ab_law, utility_law=CorruptionLaw(u_star=u_star, delta=truth["delta"]))
        u_hat = np.array(est.get("u", est.get("mu")))
        acc_hat = acc(u_hat, scenario, args.N, rng)
        acc_star = acc(u_star, scenario, args.N, rng)
        print(json.dumps({"metric": "acc_ratio", "value": acc_hat / acc_star,
                          "acc_hat": acc_hat, "acc_star": acc_star}))
    return 0


def cmd_reproduce_table1(argv):
    parser = argparse.ArgumentParser(prog="revpref reproduce-table1")
    _add_common(parser)
    parser.add_argument("--out", required=True)
    parser.add_argument("--scale", default="desk", choices=["smoke", "desk", "full"])
    args = _apply_config(parser, argv)

    def progress(summary):
        print(f"{summary['setting']:>10s} {summary['scenario']:>12s} n={summary['n']:<3d} "
              f"mean={summary['mean']:.4f}", flush=True)

    reproduce_table1(args.out, scale=args.scale, master_seed=args.seed, progress=progress)
    print(f"wrote {args.out}")
    return 0


def cmd_diagnose_distance(argv):
    parser = argparse.ArgumentParser(prog="revpref diagnose-distance")
    _add_common(parser)
    parser.add_argument("--out", required=True)
    parser.add_argument("--n", type=int, default=5)
    parser.add_argument("--ab-law", default="uniform_i", choices=["uniform_i", "discrete_ii", "fixed_a_iii"])
    parser.add_argument("--N", type=int, default=20_000)
    parser.add_argument("--kappa", type=float, default=5.0)
    args = _apply_config(parser, argv)

    rows = distance_mismatch_curve(n=args.n, ab_law=args.ab_law, N=args.N,
                                   seed=args.seed, kappa_star=args.kappa)
    write_distance_csv(args.out, rows)
    print(f"wrote {args.out}")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "estimate-gaussian": cmd_estimate_gaussian,
    "estimate-corruption": cmd_estimate_corruption,
    "estimate-moment": cmd_estimate_moment,
    "evaluate": cmd_evaluate,
    "reproduce-table1": cmd_reproduce_table1,
    "diagnose-distance": cmd_diagnose_distance,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print("usage: revpref <command> [options]\ncommands: " + ", ".join(COMMANDS))
        return 0 if argv else 2
    command = argv[0]
    if command not in COMMANDS:
        print(f"unknown command {command!r}; expected one of: {', '.join(COMMANDS)}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[command](argv[1:])
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

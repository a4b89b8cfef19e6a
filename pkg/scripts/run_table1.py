#!/usr/bin/env python3
"""Reproduce the benchmark accuracy table and write summary/trial CSVs.

Usage: python scripts/run_table1.py --out results/table1.csv [--scale desk] [--seed 0]
"""

import argparse
from pathlib import Path

from revpref.experiments import reproduce_table1


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/table1.csv")
    parser.add_argument("--scale", default="desk", choices=["smoke", "desk", "full"])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)

    def progress(cell):
        print(f"{cell['setting']:>10s} {cell['scenario']:>12s} n={cell['n']:<3d} "
              f"mean={cell['mean']:.4f} stderr={cell['stderr']:.4f}", flush=True)

    reproduce_table1(args.out, scale=args.scale, master_seed=args.seed, progress=progress)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

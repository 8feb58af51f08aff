#!/usr/bin/env python3
"""Adaptive ESS study on the Poisson random-effects posterior (paper-style
Figure 2).  20 repetitions of 2e4 iterations by default; --full runs the
paper's 100 x 5e4 setting."""
import argparse
import os
import sys

from lbmh import experiments as xp


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="out")
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--full", action="store_true")
    args = ap.parse_args()
    rows = xp.poisson_experiment(
        reps=100 if args.full else 20,
        n_iters=50_000 if args.full else 20_000,
        master_seed=args.seed,
        threads=args.threads,
    )
    os.makedirs(args.out, exist_ok=True)
    path = f"{args.out}/poisson.csv"
    xp.write_poisson_csv(rows, path)
    print(f"{len(rows)} rows -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

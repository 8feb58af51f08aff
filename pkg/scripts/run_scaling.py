#!/usr/bin/env python3
"""Optimal-ESJD scaling study on both product targets (paper-style Figure 1).

Desk scale by default (n up to 4096, 2e5 samples per tuned point); pass
--extended for the n = 35000 grid.  Writes scan_gaussian.csv and
scan_hyperbolic.csv under --out.
"""
import argparse
import sys

from lbmh import experiments as xp
from lbmh.targets import make_gaussian_factor, make_hyperbolic_factor

PRESETS = ["rwm", "mala", "barker", "barker-rademacher", "barker-bimodal(0.1)", "three-point(2)"]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="out")
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--extended", action="store_true")
    args = ap.parse_args()

    grid = [32, 64, 128, 256, 512, 1024, 2048, 4096]
    if args.extended:
        grid += [8192, 16384, 35000]
    import os

    os.makedirs(args.out, exist_ok=True)
    for label, factor in (("gaussian", make_gaussian_factor()), ("hyperbolic", make_hyperbolic_factor(0.1))):
        rows = xp.esjd_scan(
            PRESETS, factor, grid, master_seed=args.seed,
            search_samples=max(2000, args.samples // 10),
            final_samples=args.samples, threads=args.threads,
        )
        path = f"{args.out}/scan_{label}.csv"
        xp.write_scan_csv(rows, path)
        print(f"{label}: slopes {xp.slope_fits(rows)} -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

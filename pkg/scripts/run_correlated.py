#!/usr/bin/env python3
"""ESJD scaling on strongly correlated Gaussian targets (paper-style Figure 3):
equicorrelated and AR(1) covariances at rho = 0.99, isotropic proposals."""
import argparse
import os
import sys

from lbmh import experiments as xp

PRESETS = ["rwm", "mala", "barker", "barker-rademacher", "barker-bimodal(0.1)", "three-point(2)"]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="out")
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--rho", type=float, default=0.99)
    ap.add_argument("--samples", type=int, default=200_000)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for structure in ("equicorrelated", "ar1"):
        rows = xp.correlated_scan(
            PRESETS, structure, args.rho, [32, 64, 128, 256, 512, 1024],
            master_seed=args.seed, search_samples=max(2000, args.samples // 10),
            final_samples=args.samples, threads=args.threads,
        )
        path = f"{args.out}/correlated_{structure}.csv"
        xp.write_scan_csv(rows, path)
        print(f"{structure}: {len(rows)} rows -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

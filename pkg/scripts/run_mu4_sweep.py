#!/usr/bin/env python3
"""Three-point designs across mu4 on the hyperbolic target (paper-style
appendix sweep): small mu4 wins only once the dimension is large enough."""
import argparse
import os
import sys

from lbmh import experiments as xp
from lbmh.targets import make_hyperbolic_factor


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="out")
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--mu4", default="1.1,1.25,1.5,2")
    ap.add_argument("--samples", type=int, default=200_000)
    args = ap.parse_args()
    rows = xp.mu4_sweep(
        make_hyperbolic_factor(0.1),
        [float(v) for v in args.mu4.split(",")],
        [8, 16, 32, 64, 128, 256, 512, 1024],
        master_seed=args.seed,
        search_samples=max(2000, args.samples // 10),
        final_samples=args.samples,
        threads=args.threads,
    )
    os.makedirs(args.out, exist_ok=True)
    path = f"{args.out}/sweep.csv"
    xp.write_sweep_csv(rows, path)
    print(f"{len(rows)} rows -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

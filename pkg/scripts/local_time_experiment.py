"""Local-time diagnostics on one simulated ensemble.

Prints moment scaling (n = 1, 2), space regularity, the limsup ratio and the
irregularity floor, and writes the limsup ratios to CSV.

    python scripts/local_time_experiment.py --hurst 0.7 --paths 500 --steps 16384
"""
import argparse
import csv
import os

import numpy as np

from rosenlab import loctime, simulate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--hurst", type=float, default=0.7)
    ap.add_argument("--paths", type=int, default=500)
    ap.add_argument("--steps", type=int, default=2 ** 14)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="limsup.csv")
    args = ap.parse_args()
    paths = simulate.sample_paths(args.hurst, args.steps, args.paths, args.seed, threads=args.threads)
    for n in (1, 2):
        r = loctime.verify_moment_scaling(paths, n)
        print(f"moment n={n}: slope {r.slope:.4f} +- {r.stderr:.4f} (expected {r.expected:.4f})")
    gamma = 0.5 * paths[0].hurst.holder_space_limit()
    r = loctime.verify_space_holder(paths, gamma)
    print(f"space regularity: slope {r.slope:.4f} for gamma {gamma:.4f} -> {'ok' if r.passed else 'fail'}")
    # radii down to 2^-10, but never below the 20-step resolution limit
    kmax = min(10, int(np.floor(np.log2(1.0 / (20 * paths[0].dt)))))
    lim = loctime.limsup_diagnostic(paths[:100], r=2.0 ** -np.arange(4, kmax + 1))
    print(f"limsup ratio bounded: {lim.bounded}")
    irr = loctime.irregularity_diagnostic(paths[:100])
    print(f"irregularity trend {irr.trend:.4f} -> {'ok' if irr.passed else 'fail'}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "mean_ratio", "running_max"])
        for row in zip(lim.r, lim.ratios.mean(axis=0), lim.running_max):
            w.writerow([f"{v:.6g}" for v in row])


if __name__ == "__main__":
    main()

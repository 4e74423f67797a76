"""Empirical coverage of the oracle bound over a grid of sample sizes, with lambda and tau at their theory values.

Usage:
    python scripts/coverage_study.py [--reps 50] [--ns 25 50 100]
"""

import argparse
import os
import sys

from quasibayes.experiment import ExperimentConfig, run_study


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=50)
    parser.add_argument("--ns", type=int, nargs="+", default=[25, 50, 100, 200])
    parser.add_argument("--epsilon", type=float, default=0.1)
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    args = parser.parse_args(argv)

    print(f"{'n':>6} {'bound':>12} {'method':>8} {'coverage':>9}")
    for n in args.ns:
        cfg = ExperimentConfig(problem="blr", n=n, p=5, k=8, q=6, reps=args.reps, lam="theory", tau="theory",
                               epsilon=args.epsilon, jobs=args.jobs)
        theory = run_study(cfg)["theory"]
        for method, cov in theory["coverage"].items():
            print(f"{n:>6} {theory['bound_at_Mstar']:>12.4g} {method:>8} {cov:>9.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Run the simulation settings of the BLR and IMC studies and write one report per setting.

Usage:
    python scripts/reproduce_tables.py --out results [--reps 100] [--jobs 4] [--only blr_model1]
"""

import argparse
import os
import sys
from dataclasses import replace

from quasibayes.experiment import ExperimentConfig, run_study, table_title, write_report

SETTINGS = {
    "blr_model1": [dict(problem="blr", model=1, n=n, p=p) for n in (100, 1000) for p in (10, 100)],
    "blr_model2": [dict(problem="blr", model=2, n=n, p=p) for n in (100, 1000) for p in (10, 100)],
    "imc_model1": [dict(problem="imc", model=1, n=n, p=p, kappa=kappa)
                   for kappa in (0.1, 0.3) for n in (100, 1000) for p in (10, 100)],
}


def setting_name(cfg):
    extra = f"_kappa{int(round(cfg.kappa * 100))}" if cfg.problem == "imc" else ""
    return f"{cfg.problem}_model{cfg.model}_n{cfg.n}_p{cfg.p}{extra}"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results")
    parser.add_argument("--reps", type=int, default=100)
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--only", choices=sorted(SETTINGS), action="append")
    args = parser.parse_args(argv)

    base = ExperimentConfig(k=20, q=10, reps=args.reps, jobs=args.jobs, master_seed=args.seed)
    for group in args.only or sorted(SETTINGS):
        for kw in SETTINGS[group]:
            cfg = replace(base, **kw)
            out = os.path.join(args.out, setting_name(cfg))
            print(f"running {table_title(cfg)}", flush=True)
            write_report(run_study(cfg), out, cfg)
            with open(os.path.join(out, "table.txt")) as fh:
                print(fh.read(), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``run`` a simulation study or ``estimate`` from CSV files.

Flags may also be given in a flat ``key=value`` file passed with
``--config``; flags on the command line take precedence.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from .baselines import ImputeConfig, impute_low_rank, ols_estimate
from .csvio import (CSVFormatError, read_matrix_csv, read_observations_csv, write_matrix_csv,
                    write_observations_csv)
from .datagen import DesignPair, ObservationMode, full_observations
from .experiment import ExperimentConfig, make_instance, run_study, write_report
from .posterior import QuasiPosteriorSpec
from .prior import PriorParams
from .samplers import SamplerConfig, run_chain

log = logging.getLogger("quasibayes")


def _number_or(*words):
    def parse(text):
        if text in words:
            return text
        try:
            return float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a number or one of {words}, got {text!r}")
    return parse


def _auto_float(text):
    return None if text == "auto" else float(text)


def _bool(text):
    if isinstance(text, bool):
        return text
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_sampler_flags(sp):
    sp.add_argument("--iterations", "--T", type=int, default=10000)
    sp.add_argument("--burn-in", type=int, default=1000)
    sp.add_argument("--step-size", "--h", type=_auto_float, default=None,
                    help="Langevin step size, or 'auto'")
    sp.add_argument("--adapt", type=_bool, default=True, help="adapt the MALA step size during burn-in")
    sp.add_argument("--target-acceptance", type=float, default=0.5)
    sp.add_argument("--lambda", dest="lam", type=_number_or("auto", "theory"), default="auto")
    sp.add_argument("--tau", type=_number_or("theory"), default=1.0)
    sp.add_argument("--C", type=_number_or("auto"), default="auto")
    sp.add_argument("--impute-rank", type=int, default=2)


def build_parser():
    parser = argparse.ArgumentParser(prog="quasibayes", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulation study")
    run.add_argument("--config", help="flat key=value file with defaults for these flags")
    run.add_argument("--problem", choices=("blr", "imc"), default="blr")
    run.add_argument("--n", type=int, default=100)
    run.add_argument("--p", type=int, default=10)
    run.add_argument("--k", type=int, default=20)
    run.add_argument("--q", type=int, default=10)
    run.add_argument("--model", type=int, choices=(1, 2), default=1)
    run.add_argument("--noise-sd", type=float, default=1.0)
    run.add_argument("--kappa", type=float, default=0.1)
    run.add_argument("--reps", type=int, default=100)
    run.add_argument("--algorithm", choices=("lmc", "mala", "both"), default="both")
    run.add_argument("--seed", dest="master_seed", type=int, default=0)
    run.add_argument("--pred-from", choices=("coefficient", "predictor"), default="coefficient")
    run.add_argument("--sigma", type=float, default=None)
    run.add_argument("--xi", type=float, default=None)
    run.add_argument("--delta", type=float, default=1.0)
    run.add_argument("--epsilon", type=float, default=0.1)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--timestamp", default=None, help="fixed value for the report's 'created' field")
    run.add_argument("--out", required=True)
    _add_sampler_flags(run)

    est = sub.add_parser("estimate", help="estimate from user CSV files")
    est.add_argument("--config")
    est.add_argument("--x", required=True, help="n x p design CSV")
    est.add_argument("--z", required=True, help="k x q design CSV")
    group = est.add_mutually_exclusive_group(required=True)
    group.add_argument("--y", help="complete n x q response CSV")
    group.add_argument("--obs", help="row,col,value observation CSV")
    est.add_argument("--method", choices=("ols", "ols_imp", "lmc", "mala"), default="mala")
    est.add_argument("--init", choices=("baseline", "zero"), default="baseline")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--out", required=True)
    _add_sampler_flags(est)

    gen = sub.add_parser("generate", help="write one synthetic instance as CSV files")
    gen.add_argument("--problem", choices=("blr", "imc"), default="blr")
    for dim, default in (("n", 100), ("p", 10), ("k", 20), ("q", 10)):
        gen.add_argument(f"--{dim}", type=int, default=default)
    gen.add_argument("--model", type=int, choices=(1, 2), default=1)
    gen.add_argument("--noise-sd", type=float, default=1.0)
    gen.add_argument("--kappa", type=float, default=0.1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    return parser


def read_config_file(path):
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        values = read_config_file(args.config)
        sp = parser._subparsers._group_actions[0].choices[args.command]
        dests = {a.dest for a in sp._actions}
        aliases = {"seed": "master_seed", "lambda": "lam", "T": "iterations", "h": "step_size"}
        defaults = {}
        for key, value in values.items():
            dest = aliases.get(key, key) if aliases.get(key, key) in dests else key
            if dest not in dests:
                parser.error(f"unknown key {key!r} in {args.config}")
            defaults[dest] = value
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def config_from_args(args):
    algorithms = ("lmc", "mala") if args.algorithm == "both" else (args.algorithm,)
    return ExperimentConfig(
        problem=args.problem, n=args.n, p=args.p, k=args.k, q=args.q, model=args.model,
        noise_sd=args.noise_sd, kappa=args.kappa, reps=args.reps, algorithms=algorithms,
        iterations=args.iterations, burn_in=args.burn_in, step_size=args.step_size, adapt=args.adapt,
        target_acceptance=args.target_acceptance, lam=args.lam, tau=args.tau, C=args.C,
        master_seed=args.master_seed, impute_rank=args.impute_rank, pred_from=args.pred_from,
        sigma=args.sigma, xi=args.xi, delta=args.delta, epsilon=args.epsilon, jobs=args.jobs)


def cmd_run(args):
    cfg = config_from_args(args)
    report = run_study(cfg)
    write_report(report, args.out, cfg, args.timestamp)
    with open(os.path.join(args.out, "table.txt")) as fh:
        sys.stdout.write(fh.read())
    return 0


def _summarise_trace(path, burn_in):
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    post = data[data["iter"] > burn_in]
    lp = post["log_quasi_posterior"] if post.size else data["log_quasi_posterior"]
    return {"iterations_run": int(data["iter"].max()), "log_posterior_first": float(data["log_quasi_posterior"][0]),
            "log_posterior_last": float(data["log_quasi_posterior"][-1]),
            "log_posterior_mean": float(np.mean(lp)), "log_posterior_max": float(np.max(lp)),
            "trace_file": os.path.basename(path)}


def estimate(designs, Y=None, obs=None, method="mala", lam="auto", tau=1.0, C="auto",
             impute_rank=2, sampler=None, init="baseline", trace_path=None):
    """Run one estimator on user data.

    Returns ``(M_hat, predictor, diagnostics)``; ``predictor`` is the clipped
    posterior-mean predictor for chains and the clipped ``X M_hat Z`` for the
    least-squares baselines.
    """
    if obs is None:
        obs = full_observations(Y)
    partial = not (obs.mode is ObservationMode.FULL and obs.is_complete())
    C_val = 1.5 * float(np.max(np.abs(obs.values))) if C == "auto" else float(C)
    if partial or method == "ols_imp":
        baseline = ols_estimate(impute_low_rank(obs, ImputeConfig(rank=impute_rank)).matrix, designs)
    else:
        baseline = ols_estimate(obs.cell_means()[0], designs)
    diagnostics = {"method": method, "n_observed": len(obs), "C": C_val}
    if method in ("ols", "ols_imp"):
        if method == "ols" and partial:
            raise ValueError("method 'ols' needs a complete response; use 'ols_imp'")
        M_hat = baseline
        predictor = np.clip(designs.X @ M_hat @ designs.Z, -C_val, C_val)
        return M_hat, predictor, diagnostics
    if lam == "theory" or tau == "theory":
        raise ValueError("theory-driven lambda/tau need the noise constants; use `run` or give numbers")
    lam_val = float(len(obs)) if lam == "auto" else float(lam)
    spec = QuasiPosteriorSpec(designs, obs, lam_val, PriorParams(float(tau)), C_val)
    sampler = sampler or SamplerConfig(algorithm=method)
    sampler = replace(sampler, algorithm=method, trace_path=trace_path)
    M0 = baseline if init == "baseline" else np.zeros_like(baseline)
    res = run_chain(spec, M0, sampler)
    diagnostics.update({"lambda": lam_val, "tau": float(tau), "acceptance_rate": res.acceptance_rate,
                        "diverged": res.diverged, "samples_kept": res.samples_kept,
                        "initial_step_size": res.initial_step_size, "final_step_size": res.final_step_size})
    if trace_path:
        diagnostics["trace"] = _summarise_trace(trace_path, sampler.burn_in)
    return res.posterior_mean_coefficient, res.posterior_mean_predictor, diagnostics


def cmd_estimate(args):
    X = read_matrix_csv(args.x)
    Z = read_matrix_csv(args.z)
    designs = DesignPair(X, Z)
    n, q, p, k = designs.dims
    Y = obs = None
    if args.y:
        Y = read_matrix_csv(args.y)
        if Y.shape != (n, q):
            raise CSVFormatError(f"{args.y}: response has shape {Y.shape}, expected {(n, q)} from {args.x} and {args.z}")
    else:
        obs = read_observations_csv(args.obs, (n, q))
    os.makedirs(args.out, exist_ok=True)
    sampler = SamplerConfig(algorithm=args.method if args.method in ("lmc", "mala") else "mala",
                            step_size=args.step_size, iterations=args.iterations, burn_in=args.burn_in,
                            seed=args.seed, adapt=args.adapt, target_acceptance=args.target_acceptance)
    trace = os.path.join(args.out, "trace.csv") if args.method in ("lmc", "mala") else None
    M_hat, predictor, diag = estimate(designs, Y=Y, obs=obs, method=args.method, lam=args.lam, tau=args.tau,
                                      C=args.C, impute_rank=args.impute_rank, sampler=sampler,
                                      init=args.init, trace_path=trace)
    write_matrix_csv(os.path.join(args.out, "M_hat.csv"), M_hat)
    if obs is not None:
        write_matrix_csv(os.path.join(args.out, "predictor.csv"), predictor)
    with open(os.path.join(args.out, "diagnostics.json"), "w") as fh:
        json.dump(diag, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_generate(args):
    cfg = ExperimentConfig(problem=args.problem, n=args.n, p=args.p, k=args.k, q=args.q, model=args.model,
                           noise_sd=args.noise_sd, kappa=args.kappa, reps=1)
    inst = make_instance(cfg, args.seed)
    os.makedirs(args.out, exist_ok=True)
    write_matrix_csv(os.path.join(args.out, "X.csv"), inst.designs.X)
    write_matrix_csv(os.path.join(args.out, "Z.csv"), inst.designs.Z)
    write_matrix_csv(os.path.join(args.out, "M_star.csv"), inst.truth.M_star)
    write_matrix_csv(os.path.join(args.out, "Y.csv"), inst.Y)
    write_observations_csv(os.path.join(args.out, "obs.csv"), inst.obs)
    return 0


def main(argv=None):
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": cmd_run, "estimate": cmd_estimate, "generate": cmd_generate}
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

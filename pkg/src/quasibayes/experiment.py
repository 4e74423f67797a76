"""Simulation study runner: replications, baselines, chains, theory and reports."""

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional, Union

import numpy as np

from .baselines import ImputeConfig, ols_estimate, ols_imp_estimate
from .datagen import (ObservationMode, child_seed, full_observations, gen_coefficient,
                      gen_designs, gen_response, sample_observations)
from .metrics import AggregateRow, ErrorReport, aggregate, compute_errors, format_table
from .posterior import QuasiPosteriorSpec
from .prior import PriorParams
from .samplers import SamplerConfig, run_chain
from .theory import (TheoryInputs, derive_constants, empirical_coverage, oracle_bound,
                     per_entry_prediction_error)

log = logging.getLogger(__name__)

MAX_RESTARTS = 5
# sub-stream ids within one replication seed
DESIGN_STREAM, COEF_STREAM, NOISE_STREAM, MASK_STREAM, CHAIN_STREAM = 0, 1, 2, 3, 10


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation study.

    ``lam``: a number, ``"auto"`` (n q for blr, m for imc) or ``"theory"``.
    ``tau``: a number or ``"theory"``.  ``C``: a number or ``"auto"``
    (1.5 times the largest observed absolute response).
    """

    problem: str = "blr"
    n: int = 100
    p: int = 10
    k: int = 20
    q: int = 10
    model: int = 1
    noise_sd: float = 1.0
    kappa: float = 0.1
    reps: int = 100
    algorithms: tuple = ("lmc", "mala")
    iterations: int = 10000
    burn_in: int = 1000
    step_size: Optional[float] = None
    adapt: bool = True
    target_acceptance: float = 0.5
    lam: Union[float, str] = "auto"
    tau: Union[float, str] = 1.0
    C: Union[float, str] = "auto"
    master_seed: int = 0
    impute_rank: int = 2
    pred_from: str = "coefficient"
    sigma: Optional[float] = None  # noise constant for theory, defaults to noise_sd
    xi: Optional[float] = None  # defaults to sigma
    delta: float = 1.0
    epsilon: float = 0.1
    jobs: int = 1

    def __post_init__(self):
        if self.problem not in ("blr", "imc"):
            raise ValueError(f"problem must be 'blr' or 'imc', got {self.problem!r}")
        if self.model not in (1, 2):
            raise ValueError(f"model must be 1 or 2, got {self.model}")
        if min(self.n, self.p, self.k, self.q) < 1 or self.p < 2 or self.k < 2:
            raise ValueError("dimensions must be positive with p, k >= 2")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.problem == "imc" and not 0.0 <= self.kappa < 1.0:
            raise ValueError("kappa must lie in [0, 1)")
        for alg in self.algorithms:
            if alg not in ("lmc", "mala"):
                raise ValueError(f"unknown algorithm {alg!r}")
        if self.pred_from not in ("coefficient", "predictor"):
            raise ValueError("pred_from must be 'coefficient' or 'predictor'")
        if isinstance(self.lam, str) and self.lam not in ("auto", "theory"):
            raise ValueError("lambda must be a number, 'auto' or 'theory'")
        if isinstance(self.tau, str) and self.tau != "theory":
            raise ValueError("tau must be a number or 'theory'")
        if isinstance(self.C, str) and self.C != "auto":
            raise ValueError("C must be a number or 'auto'")
        SamplerConfig(iterations=self.iterations, burn_in=self.burn_in, step_size=self.step_size,
                      target_acceptance=self.target_acceptance)

    def to_dict(self):
        d = asdict(self)
        d["algorithms"] = list(self.algorithms)
        return d


@dataclass
class Instance:
    designs: object
    truth: object
    Y: np.ndarray
    obs: object


def make_instance(cfg, rep_seed):
    designs = gen_designs(cfg.n, cfg.p, cfg.k, cfg.q, child_seed(rep_seed, DESIGN_STREAM))
    truth = gen_coefficient(cfg.p, cfg.k, cfg.model, child_seed(rep_seed, COEF_STREAM))
    Y = gen_response(designs, truth, cfg.noise_sd, child_seed(rep_seed, NOISE_STREAM))
    if cfg.problem == "blr":
        obs = full_observations(Y)
    else:
        obs = sample_observations(Y, ObservationMode.MASKED, cfg.kappa, child_seed(rep_seed, MASK_STREAM))
    return Instance(designs, truth, Y, obs)


def chain_seed(rep_seed, algorithm):
    stream = CHAIN_STREAM + (1 if algorithm == "mala" else 0)
    return int(child_seed(rep_seed, stream).generate_state(1)[0])


def theory_inputs(cfg, designs, C, m):
    sigma = cfg.noise_sd if cfg.sigma is None else cfg.sigma
    xi = sigma if cfg.xi is None else cfg.xi
    if xi <= 0:
        xi = 1e-12  # noiseless data: any xi > 0 satisfies the moment condition
    return TheoryInputs(sigma=sigma, xi=xi, C=C, delta=cfg.delta, epsilon=cfg.epsilon,
                        n=cfg.n, q=cfg.q, p=cfg.p, k=cfg.k,
                        X_fro=float(np.linalg.norm(designs.X)), Z_fro=float(np.linalg.norm(designs.Z)),
                        m=m)


def resolve_tuning(cfg, inst):
    """Clip level, inverse temperature, prior scale and theory quantities for one instance."""
    C = 1.5 * float(np.max(np.abs(inst.obs.values))) if cfg.C == "auto" else float(cfg.C)
    m = len(inst.obs)
    inp = theory_inputs(cfg, inst.designs, C, m)
    consts = derive_constants(inp, cfg.problem)
    if cfg.lam == "auto":
        lam = float(cfg.n * cfg.q if cfg.problem == "blr" else m)
    elif cfg.lam == "theory":
        lam = consts.lambda_star
    else:
        lam = float(cfg.lam)
    tau = consts.tau_star if cfg.tau == "theory" else float(cfg.tau)
    return C, lam, tau, inp, consts


def run_with_restarts(spec, init, scfg):
    """Run a chain, halving the step size and restarting after divergence."""
    result = run_chain(spec, init, scfg)
    restarts = 0
    while result.diverged and restarts < MAX_RESTARTS:
        restarts += 1
        scfg = replace(scfg, step_size=result.initial_step_size / 2.0)
        log.info("chain diverged; restart %d with step size %.3g", restarts, scfg.step_size)
        result = run_chain(spec, init, scfg)
    return result, restarts


def run_replication(cfg, index):
    """Everything for replication ``index``; returns a JSON-ready dict."""
    rep_seed = cfg.master_seed + index
    inst = make_instance(cfg, rep_seed)
    designs, truth = inst.designs, inst.truth
    C, lam, tau, inp, consts = resolve_tuning(cfg, inst)

    if cfg.problem == "blr":
        base_name, M0 = "OLS", ols_estimate(inst.Y, designs)
    else:
        base_name, M0 = "OLS_imp", ols_imp_estimate(inst.obs, designs, ImputeConfig(rank=cfg.impute_rank))
    reports = [compute_errors(M0, truth, designs, base_name, rep_seed)]
    base_pred = np.clip(designs.X @ M0 @ designs.Z, -C, C)
    pred_errors = {base_name: per_entry_prediction_error(base_pred, designs, truth.M_star)}

    spec = QuasiPosteriorSpec(designs, inst.obs, lam, PriorParams(tau), C)
    chains = {}
    for alg in cfg.algorithms:
        scfg = SamplerConfig(algorithm=alg, step_size=cfg.step_size, iterations=cfg.iterations,
                             burn_in=cfg.burn_in, seed=chain_seed(rep_seed, alg), adapt=cfg.adapt,
                             target_acceptance=cfg.target_acceptance)
        res, restarts = run_with_restarts(spec, M0, scfg)
        name = alg.upper()
        predictor = res.posterior_mean_predictor if cfg.pred_from == "predictor" else None
        if res.diverged:
            nan = float("nan")
            reports.append(ErrorReport(nan, nan, nan, name, rep_seed, res.acceptance_rate, True))
        else:
            reports.append(compute_errors(res.posterior_mean_coefficient, truth, designs, name, rep_seed,
                                          res.acceptance_rate, False, predictor))
            pred_errors[name] = per_entry_prediction_error(res.posterior_mean_predictor, designs, truth.M_star)
        chains[name] = {"acceptance_rate": res.acceptance_rate, "initial_step_size": res.initial_step_size,
                        "final_step_size": res.final_step_size, "restarts": restarts,
                        "diverged": res.diverged, "samples_kept": res.samples_kept}

    r_star = int(np.linalg.matrix_rank(truth.M_star))
    bound = oracle_bound(inp, consts, float(np.linalg.norm(truth.M_star)), r_star, cfg.problem, "per_entry")
    return {
        "index": index,
        "seed": rep_seed,
        "n_observed": len(inst.obs),
        "C": C,
        "lambda": lam,
        "tau": tau,
        "chains": chains,
        "theory": {**asdict(consts), "rank": r_star, "bound_at_Mstar": bound,
                   "per_entry_prediction_error": pred_errors},
        "reports": [r.to_dict() for r in reports],
    }


def _run_one(args):
    cfg, index = args
    return run_replication(cfg, index)


def run_study(cfg):
    """All replications, in index order regardless of parallelism."""
    tasks = [(cfg, i) for i in range(cfg.reps)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    results.sort(key=lambda r: r["index"])
    return build_report(cfg, results)


def build_report(cfg, results):
    reports = [ErrorReport.from_dict(d) for r in results for d in r["reports"]]
    rows = aggregate(reports)
    methods = list(results[0]["theory"]["per_entry_prediction_error"])
    coverage = {}
    for method in methods:
        errs = [r["theory"]["per_entry_prediction_error"].get(method) for r in results]
        bounds = [r["theory"]["bound_at_Mstar"] for r in results]
        hits = [e < b for e, b in zip(errs, bounds) if e is not None]
        coverage[method] = float(np.mean(hits)) if hits else None
    theory = {key: float(np.mean([r["theory"][key] for r in results]))
              for key in ("C1", "C2", "tau_star", "lambda_star", "bound_at_Mstar")}
    theory["coverage"] = coverage
    theory["epsilon"] = cfg.epsilon
    theory["delta"] = cfg.delta
    return {
        "config": cfg.to_dict(),
        "theory": theory,
        "replications": [d for r in results for d in r["reports"]],
        "instances": [{k: v for k, v in r.items() if k != "reports"} for r in results],
        "aggregates": [row.to_dict() for row in rows],
    }


def table_title(cfg):
    extra = f", kappa={cfg.kappa:g}" if cfg.problem == "imc" else ""
    return (f"{cfg.problem.upper()} model {cfg.model}: n={cfg.n}, p={cfg.p}, k={cfg.k}, q={cfg.q}"
            f"{extra}, {cfg.reps} replications")


def write_report(report, out_dir, cfg, timestamp=None):
    os.makedirs(out_dir, exist_ok=True)
    report = {"created": timestamp if timestamp is not None else time.strftime("%Y-%m-%dT%H:%M:%S"),
              **report}
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, allow_nan=False, default=_json_default)
        fh.write("\n")
    rows = [AggregateRow(**d) for d in report["aggregates"]]
    with open(os.path.join(out_dir, "table.txt"), "w") as fh:
        fh.write(format_table(rows, table_title(cfg)))
    return report


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")

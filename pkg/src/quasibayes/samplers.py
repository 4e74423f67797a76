"""Langevin samplers over coefficient matrices.

Both chains move by ``M + h * grad log rho(M) + sqrt(2h) * N`` (ascent on the
log quasi-posterior).  MALA adds a Metropolis-Hastings correction computed in
log-space.  Post-burn-in states are averaged into a coefficient estimate and
a clipped-predictor estimate.
"""

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .posterior import QuasiPosterior, QuasiPosteriorSpec

ADAPT_WINDOW = 50


@dataclass(frozen=True)
class SamplerConfig:
    """Chain settings.

    ``step_size=None`` picks a default from a curvature bound of the target:
    ``d^(-1/3) / L`` as the MALA starting point and half of that for LMC,
    where L bounds the Hessian and d is the number of coefficients.
    """

    algorithm: str = "mala"
    step_size: Optional[float] = None
    iterations: int = 10000
    burn_in: int = 1000
    seed: int = 0
    adapt: bool = True
    target_acceptance: float = 0.5
    divergence_threshold: float = 1e8
    trace_path: Optional[str] = None

    def __post_init__(self):
        if self.algorithm not in ("lmc", "mala"):
            raise ValueError(f"algorithm must be 'lmc' or 'mala', got {self.algorithm!r}")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError(f"step size must be positive, got {self.step_size}")
        if self.iterations < 1 or not 0 <= self.burn_in < self.iterations:
            raise ValueError("need iterations >= 1 and 0 <= burn_in < iterations")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ValueError("target acceptance must lie in (0, 1)")


@dataclass(frozen=True)
class ChainResult:
    posterior_mean_predictor: np.ndarray
    posterior_mean_coefficient: np.ndarray
    acceptance_rate: float
    diverged: bool
    samples_kept: int
    final_step_size: float
    initial_step_size: float


def default_step_size(target, algorithm):
    L = target.curvature_bound()
    d = int(np.prod(target.spec.coef_shape))
    h = d ** (-1.0 / 3.0) / L
    # unadjusted chains get half the MALA starting step
    return h / 2.0 if algorithm == "lmc" else h


def adapt_step_size(history, h, target):
    """Rescale ``h`` by ``exp(0.5 * (rate - target))`` for one window of outcomes."""
    if not 0.0 < target < 1.0:
        raise ValueError("target acceptance must lie in (0, 1)")
    history = np.asarray(history, dtype=float)
    if history.size == 0:
        return h
    rate = float(history.mean())
    return h * math.exp(0.5 * (rate - target))


def log_proposal_density(x_new, x, grad_x, h):
    """Log density (up to a constant) of the Langevin proposal x -> x_new."""
    d = x_new - x - h * grad_x
    return -float(np.sum(d * d)) / (4.0 * h)


def mala_log_acceptance(M, logp, grad, M_new, logp_new, grad_new, h):
    """``log`` of the Metropolis-Hastings ratio for a Langevin proposal."""
    if not math.isfinite(logp_new):
        return -math.inf
    return (logp_new - logp
            + log_proposal_density(M, M_new, grad_new, h)
            - log_proposal_density(M_new, M, grad, h))


def _evaluate(target, M):
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            return target.value_and_grad(M)
    except (np.linalg.LinAlgError, ValueError):
        return -math.inf, np.full_like(M, np.nan), None


def _as_target(spec):
    if isinstance(spec, QuasiPosteriorSpec):
        return QuasiPosterior(spec)
    return spec


def _run(spec, init, cfg, metropolis, callback):
    target = _as_target(spec)
    M = np.array(init, dtype=float)
    if M.shape != target.spec.coef_shape:
        raise ValueError(f"init has shape {M.shape}, expected {target.spec.coef_shape}")
    rng = np.random.default_rng(cfg.seed)
    h0 = cfg.step_size if cfg.step_size is not None else default_step_size(target, cfg.algorithm)
    h = h0
    logp, grad, P = target.value_and_grad(M)

    sum_M = np.zeros_like(M)
    sum_P = np.zeros_like(P)
    kept = 0
    accepted_post = 0
    window = []
    diverged = False
    adapt = metropolis and cfg.adapt

    trace_file = open(cfg.trace_path, "w", newline="") if cfg.trace_path else None
    writer = None
    if trace_file is not None:
        writer = csv.writer(trace_file)
        writer.writerow(["iter", "log_quasi_posterior", "frob_norm_M", "accepted"])
    try:
        for t in range(1, cfg.iterations + 1):
            noise = rng.standard_normal(M.shape)
            proposal = M + h * grad + math.sqrt(2.0 * h) * noise
            if metropolis:
                u = rng.random()
                logp_new, grad_new, P_new = _evaluate(target, proposal)
                log_alpha = mala_log_acceptance(M, logp, grad, proposal, logp_new, grad_new, h)
                accepted = math.log(u) < log_alpha if u > 0 else True
                if accepted:
                    M, logp, grad, P = proposal, logp_new, grad_new, P_new
            else:
                accepted = True
                M = proposal
                logp, grad, P = _evaluate(target, M)

            norm = math.sqrt(float(np.sum(M * M)))
            if writer is not None:
                writer.writerow([t, repr(float(logp)), repr(norm), int(accepted)])
            if not math.isfinite(norm) or norm > cfg.divergence_threshold or not np.all(np.isfinite(grad)):
                diverged = True
                break
            if callback is not None:
                callback(t, M, accepted)

            if t <= cfg.burn_in:
                if adapt:
                    window.append(accepted)
                    if len(window) == ADAPT_WINDOW:
                        h = adapt_step_size(window, h, cfg.target_acceptance)
                        window = []
            else:
                sum_M += M
                sum_P += P
                kept += 1
                accepted_post += accepted
    finally:
        if trace_file is not None:
            trace_file.close()

    if kept:
        mean_M, mean_P = sum_M / kept, sum_P / kept
    else:
        mean_M, mean_P = np.full_like(M, np.nan), np.full_like(P, np.nan)
    rate = accepted_post / kept if (metropolis and kept) else 1.0
    return ChainResult(mean_P, mean_M, float(rate), diverged, kept, float(h), float(h0))


def lmc_run(spec, init, cfg, callback=None):
    """Unadjusted Langevin chain.

    Args:
        spec: A :class:`QuasiPosteriorSpec` (or a prepared :class:`QuasiPosterior`).
        init: Starting p x k matrix.
        cfg: :class:`SamplerConfig`; adaptation settings are ignored.
        callback: Optional ``callback(t, M, accepted)`` called after every
            iteration, e.g. to stream samples into a membership test.

    Divergence (non-finite state or ``||M||_F`` above the threshold) stops
    the chain and is reported through ``ChainResult.diverged``.
    """
    return _run(spec, init, cfg, False, callback)


def mala_run(spec, init, cfg, callback=None):
    """Metropolis-adjusted Langevin chain; see :func:`lmc_run` for arguments.

    With ``cfg.adapt`` the step size is rescaled every 50 burn-in iterations
    towards ``cfg.target_acceptance`` and frozen afterwards.
    """
    return _run(spec, init, cfg, True, callback)


def run_chain(spec, init, cfg, callback=None):
    run = mala_run if cfg.algorithm == "mala" else lmc_run
    return run(spec, init, cfg, callback)

"""Constants and oracle bounds for the quasi-posterior mean, plus empirical coverage.

``problem`` is ``"blr"`` (complete response, n*q cells) or ``"imc"`` (m
sampled cells).  Bounds are returned either in the form they are stated
(``scale="theorem"``: squared Frobenius error for blr, sampling-weighted
squared error for imc) or per response entry (``scale="per_entry"``, i.e.
divided by n*q; for uniform sampling the imc form is already per entry).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class TheoryInputs:
    sigma: float
    xi: float
    C: float
    delta: float
    epsilon: float
    n: int
    q: int
    p: int
    k: int
    X_fro: float
    Z_fro: float
    m: Optional[int] = None

    def __post_init__(self):
        for name in ("C", "delta", "X_fro", "Z_fro"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma < 0 or self.xi <= 0:
            raise ValueError("need sigma >= 0 and xi > 0")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")


@dataclass(frozen=True)
class TheoryConstants:
    C1: float
    C2: float
    tau_star: float
    lambda_star: float


def _sample_size(inp, problem):
    if problem == "blr":
        return inp.n * inp.q
    if problem == "imc":
        if inp.m is None:
            raise ValueError("imc bounds need the number of observations m")
        return inp.m
    raise ValueError(f"unknown problem {problem!r}")


def derive_constants(inp, problem="blr"):
    N = _sample_size(inp, problem)
    C1 = 8.0 * (inp.sigma ** 2 + inp.C ** 2)
    C2 = 64.0 * inp.C * max(inp.xi, inp.C)
    norms = inp.X_fro ** 2 * inp.Z_fro ** 2
    if problem == "blr":
        tau2 = C1 * (inp.k + inp.p) / (inp.n * inp.k * inp.q * norms)
    else:
        tau2 = C1 * (inp.k + inp.p) / (inp.m * inp.k * inp.p * norms)
    lam = N * min(1.0 / (2.0 * C2), inp.delta / (C1 * (1.0 + inp.delta)))
    return TheoryConstants(C1, C2, math.sqrt(tau2), lam)


def oracle_bound(inp, consts, Mbar_norm, r, problem="blr", scale="theorem"):
    """Complexity part of the oracle inequality at a candidate of rank ``r``.

    This is the whole right-hand side when the candidate is the truth itself
    (its approximation term vanishes).  A rank-zero candidate contributes no
    log term.
    """
    if r < 0:
        raise ValueError(f"rank must be nonnegative, got {r}")
    if Mbar_norm < 0:
        raise ValueError("norm must be nonnegative")
    N = _sample_size(inp, problem)
    p, k = inp.p, inp.k
    if problem == "blr":
        count = inp.n * k * inp.q
    else:
        count = inp.m * k * p
    log_term = 0.0
    if r > 0:
        ratio = inp.X_fro * inp.Z_fro * Mbar_norm / math.sqrt(consts.C1)
        log_term = 4 * r * (k + p + 2) * math.log1p(ratio * math.sqrt(count / (r * (k + p))))
    lead = consts.C1 * (1.0 + inp.delta) ** 2 / inp.delta
    value = lead * (log_term + k + p + 2.0 * math.log(2.0 / inp.epsilon))
    if problem == "imc":
        value /= N
    if scale == "theorem":
        return value
    nq = inp.n * inp.q
    if scale == "per_entry":
        return value / nq if problem == "blr" else value
    if scale == "frobenius":
        return value if problem == "blr" else value * nq
    raise ValueError(f"unknown scale {scale!r}")


def empirical_coverage(estimator_errors, bound):
    """Fraction of errors strictly below ``bound``."""
    errors = np.asarray(estimator_errors, dtype=float)
    if errors.size == 0:
        raise ValueError("need at least one error value")
    return float(np.mean(errors < bound))


def per_entry_prediction_error(predictor, designs, M_star):
    """``||predictor - X M* Z||_F^2 / (n q)``."""
    diff = predictor - designs.X @ M_star @ designs.Z
    return float(np.sum(diff * diff)) / diff.size


class ContractionMonitor:
    """Chain callback counting post-burn-in samples inside the contraction set.

    A state M is inside when ``||clip(X M Z) - X M* Z||_F^2 / (n q) <= bound``.
    """

    def __init__(self, designs, M_star, C, bound, burn_in):
        self.X, self.Z = designs.X, designs.Z
        self.signal = designs.X @ M_star @ designs.Z
        self.C = C
        self.bound = bound
        self.burn_in = burn_in
        self.inside = 0
        self.total = 0

    def __call__(self, t, M, accepted):
        if t <= self.burn_in:
            return
        P = np.clip(self.X @ M @ self.Z, -self.C, self.C)
        err = float(np.sum((P - self.signal) ** 2)) / P.size
        self.total += 1
        self.inside += err <= self.bound

    @property
    def fraction(self):
        return self.inside / self.total if self.total else float("nan")

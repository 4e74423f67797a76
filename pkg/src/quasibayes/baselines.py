"""Least-squares baselines: OLS for complete responses, OLS after imputation otherwise."""

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, low_rank_approx, pseudo_inverse


@dataclass(frozen=True)
class ImputeConfig:
    rank: int = 2
    max_iters: int = 200
    tol: float = 1e-6


@dataclass
class Imputation:
    matrix: np.ndarray
    converged: bool
    iterations: int
    objective: list = field(default_factory=list)  # ||P_obs(Y - A_t)||_F^2 per iteration


def ols_estimate(Y, designs):
    """``(X^T X)^+ X^T Y Z^T (Z Z^T)^+``."""
    X, Z = designs.X, designs.Z
    Y = as_matrix(Y, "Y")
    if Y.shape != (X.shape[0], Z.shape[1]):
        raise ValueError(f"Y has shape {Y.shape}, expected {(X.shape[0], Z.shape[1])}")
    return pseudo_inverse(X.T @ X) @ X.T @ Y @ Z.T @ pseudo_inverse(Z @ Z.T)


def impute_low_rank(obs, cfg=ImputeConfig()):
    """Fill the unobserved cells of a response by rank-constrained hard-impute.

    Repeated observations of a cell are averaged first.  Missing cells start
    at zero; each sweep replaces the completed matrix by its best rank-``r``
    approximation while holding observed cells at their values.  Observed
    cells of the returned matrix equal the (averaged) observations exactly.
    """
    if len(obs) == 0:
        raise ValueError("need at least one observed entry")
    n, q = obs.shape
    if not 1 <= cfg.rank <= min(n, q):
        raise ValueError(f"imputation rank must be in [1, {min(n, q)}], got {cfg.rank}")
    Y_obs, mask = obs.cell_means()
    missing = ~mask
    if not missing.any():
        return Imputation(Y_obs, True, 0, [])

    fill = Y_obs.copy()
    estimate = np.zeros((n, q))
    old = np.zeros(int(missing.sum()))
    converged = False
    history = []
    it = 0
    for it in range(1, cfg.max_iters + 1):
        fill[missing] = estimate[missing]
        estimate = low_rank_approx(fill, cfg.rank)
        resid = (Y_obs - estimate)[mask]
        history.append(float(resid @ resid))
        new = estimate[missing]
        change = np.linalg.norm(new - old) / max(np.linalg.norm(old), 1e-300)
        old = new
        if change < cfg.tol:
            converged = True
            break
    out = estimate.copy()
    out[mask] = Y_obs[mask]
    return Imputation(out, converged, it, history)


def ols_imp_estimate(obs, designs, cfg=ImputeConfig()):
    return ols_estimate(impute_low_rank(obs, cfg).matrix, designs)

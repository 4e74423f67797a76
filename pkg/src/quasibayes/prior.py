"""Spectral scaled Student prior on p x k coefficient matrices.

The density is proportional to ``det(tau^2 I_p + M M^T) ** (-(p + k + 2) / 2)``,
i.e. a product of scaled Student terms in the singular values of M.  Only
log-densities up to an additive constant are exposed.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .linalg import as_matrix


def _exponent(p, k):
    return (p + k + 2) / 2.0


@dataclass(frozen=True)
class PriorParams:
    tau: float = 1.0
    backend: str = "direct"  # "direct" or "ridge" for the precision product

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.backend not in ("direct", "ridge"):
            raise ValueError(f"unknown precision backend {self.backend!r}")

    def log_density(self, M):
        return log_prior(M, self)

    def grad(self, M):
        return grad_log_prior(M, self)

    def value_and_grad(self, M):
        M = np.asarray(M, dtype=float)
        p, k = M.shape
        tau2 = self.tau ** 2
        cho = sla.cho_factor(tau2 * np.eye(p) + M @ M.T, lower=True)
        logdet = 2.0 * np.sum(np.log(np.diag(cho[0])))
        if self.backend == "ridge":
            B = ridge_precision_product(M, self)
        else:
            B = sla.cho_solve(cho, M)
        return -_exponent(p, k) * logdet, -(p + k + 2) * B


def log_prior(M, params):
    """Log prior density via the Cholesky factor of ``tau^2 I_p + M M^T``."""
    M = as_matrix(M, "M")
    p, k = M.shape
    G = params.tau ** 2 * np.eye(p) + M @ M.T
    L = np.linalg.cholesky(G)
    return -_exponent(p, k) * 2.0 * float(np.sum(np.log(np.diag(L))))


def log_prior_svd(M, params):
    """Same quantity as :func:`log_prior`, evaluated from singular values."""
    M = as_matrix(M, "M")
    p, k = M.shape
    s = np.linalg.svd(M, compute_uv=False)
    tau2 = params.tau ** 2
    logdet = 2.0 * (p - min(p, k)) * np.log(params.tau) + np.sum(np.log(tau2 + s ** 2))
    return -_exponent(p, k) * float(logdet)


def grad_log_prior(M, params):
    """``-(p + k + 2) (tau^2 I_p + M M^T)^{-1} M`` by a symmetric positive definite solve."""
    M = as_matrix(M, "M")
    p, k = M.shape
    if params.backend == "ridge":
        return -(p + k + 2) * ridge_precision_product(M, params)
    G = params.tau ** 2 * np.eye(p) + M @ M.T
    return -(p + k + 2) * sla.solve(G, M, assume_a="pos")


def ridge_precision_product(M, params):
    """Solve the ridge problem ``min_B ||I_k - M^T B||_F^2 + tau^2 ||B||_F^2``.

    The minimiser equals ``(tau^2 I_p + M M^T)^{-1} M``.  It is computed in
    the dual (kernel) form ``M (tau^2 I_k + M^T M)^{-1}``, which only needs a
    k x k factorisation and is the cheap route when p is large.
    """
    M = as_matrix(M, "M")
    p, k = M.shape
    K = params.tau ** 2 * np.eye(k) + M.T @ M
    # B^T = K^{-1} M^T since K is symmetric
    return sla.solve(K, M.T, assume_a="pos").T


@dataclass(frozen=True)
class GaussianPrior:
    """Isotropic N(0, variance) prior; a conjugate surrogate for sampler checks."""

    variance: float = 1.0

    def log_density(self, M):
        M = np.asarray(M, dtype=float)
        return -0.5 * float(np.sum(M * M)) / self.variance

    def grad(self, M):
        return -np.asarray(M, dtype=float) / self.variance

    def value_and_grad(self, M):
        return self.log_density(M), self.grad(M)


@dataclass(frozen=True)
class FlatPrior:
    """Improper constant prior (zero log-density and gradient)."""

    def log_density(self, M):
        return 0.0

    def grad(self, M):
        return np.zeros_like(np.asarray(M, dtype=float))

    def value_and_grad(self, M):
        return 0.0, self.grad(M)

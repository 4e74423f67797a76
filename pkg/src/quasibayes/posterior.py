"""Empirical risk and the log quasi-posterior, for complete or partial responses."""

from dataclasses import dataclass
from typing import Any

import numpy as np

from .datagen import DesignPair, ObservationMode, ObservationSet
from .linalg import as_matrix, spectral_norm


@dataclass(frozen=True)
class QuasiPosteriorSpec:
    """Everything that defines ``exp(-lam * risk(M)) * prior(M)``.

    ``prior`` is any object exposing ``log_density``, ``grad`` and
    ``value_and_grad``; normally a :class:`~quasibayes.prior.PriorParams`.
    """

    designs: DesignPair
    obs: ObservationSet
    lam: float
    prior: Any
    C: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"inverse temperature must be nonnegative, got {self.lam}")
        if not self.C > 0:
            raise ValueError(f"truncation level must be positive, got {self.C}")
        n, q, _, _ = self.designs.dims
        if self.obs.shape != (n, q):
            raise ValueError(f"observation shape {self.obs.shape} does not match designs ({n}, {q})")
        if len(self.obs) == 0:
            raise ValueError("observation set is empty")

    @property
    def coef_shape(self):
        return self.designs.X.shape[1], self.designs.Z.shape[0]


class QuasiPosterior:
    """Precomputed evaluator for one :class:`QuasiPosteriorSpec`.

    Samplers call :meth:`value_and_grad` once per state, so the per-cell
    counts and sums are built here once.
    """

    def __init__(self, spec):
        self.spec = spec
        self.X = spec.designs.X
        self.Z = spec.designs.Z
        self.C = float(spec.C)
        self.lam = float(spec.lam)
        self.prior = spec.prior
        obs = spec.obs
        self.n_obs = len(obs)
        self.full = obs.mode is ObservationMode.FULL and obs.is_complete()
        if self.full:
            Y = np.empty(obs.shape)
            Y[obs.rows, obs.cols] = obs.values
            self.Y = Y
        else:
            self.rows, self.cols, self.values = obs.rows, obs.cols, obs.values
            self.counts = obs.counts()
            self.sums = obs.sums()

    def _check(self, M):
        M = as_matrix(M, "M")
        if M.shape != self.spec.coef_shape:
            raise ValueError(f"M has shape {M.shape}, expected {self.spec.coef_shape}")
        return M

    def predictor(self, M):
        return self.X @ (M @ self.Z)

    def risk_from_predictor(self, XMZ):
        P = np.clip(XMZ, -self.C, self.C)
        if self.full:
            R = self.Y - P
            return float(np.sum(R * R)) / self.n_obs
        r = self.values - P[self.rows, self.cols]
        return float(r @ r) / self.n_obs

    def risk(self, M):
        return self.risk_from_predictor(self.predictor(self._check(M)))

    def data_grad_from_predictor(self, XMZ):
        inside = np.abs(XMZ) < self.C
        if self.full:
            G = (self.Y - XMZ) * inside
        else:
            G = (self.sums - self.counts * XMZ) * inside
        return (2.0 * self.lam / self.n_obs) * (self.X.T @ G @ self.Z.T)

    def log_density(self, M):
        M = self._check(M)
        return -self.lam * self.risk(M) + self.prior.log_density(M)

    def grad(self, M):
        M = self._check(M)
        return self.data_grad_from_predictor(self.predictor(M)) + self.prior.grad(M)

    def value_and_grad(self, M):
        """Log density, its gradient and the clipped predictor at ``M``."""
        XMZ = self.predictor(M)
        lp, gp = self.prior.value_and_grad(M)
        value = -self.lam * self.risk_from_predictor(XMZ) + lp
        grad = self.data_grad_from_predictor(XMZ) + gp
        return value, grad, np.clip(XMZ, -self.C, self.C)

    def curvature_bound(self):
        """Upper bound on the largest Hessian eigenvalue of the negative log density.

        The data term contributes at most ``2 lam / N * c_max * ||X||_2^2 ||Z||_2^2``
        (c_max the largest per-cell multiplicity); the spectral Student prior
        at most ``(p + k + 2) / tau^2``.
        """
        cmax = 1.0 if self.full else float(self.counts.max())
        L = 2.0 * self.lam / self.n_obs * cmax * spectral_norm(self.X) ** 2 * spectral_norm(self.Z) ** 2
        tau = getattr(self.prior, "tau", None)
        if tau is not None:
            p, k = self.spec.coef_shape
            L += (p + k + 2) / tau ** 2
        variance = getattr(self.prior, "variance", None)
        if variance is not None:
            L += 1.0 / variance
        return L


def empirical_risk(M, spec):
    """Mean squared residual of the clipped predictor over the observed cells."""
    return QuasiPosterior(spec).risk(M)


def log_quasi_posterior(M, spec):
    return QuasiPosterior(spec).log_density(M)


def grad_log_quasi_posterior(M, spec):
    return QuasiPosterior(spec).grad(M)

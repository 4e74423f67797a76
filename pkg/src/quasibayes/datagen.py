"""Synthetic instances for bilinear regression and inductive matrix completion.

Every generator is a deterministic function of its arguments and seed.  Seeds
may be plain integers or :class:`numpy.random.SeedSequence` objects.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix


class ModelVariant(enum.Enum):
    EXACT_LOW_RANK = 1
    APPROX_LOW_RANK = 2


class ObservationMode(enum.Enum):
    FULL = "full"
    MASKED = "masked"  # uniform subset, without replacement
    IID = "iid"  # uniform cells, with replacement


# Variance of the dense perturbation added in the approximately low-rank model.
APPROX_PERTURBATION_VARIANCE = 0.1


@dataclass(frozen=True)
class DesignPair:
    X: np.ndarray  # n x p
    Z: np.ndarray  # k x q

    def __post_init__(self):
        object.__setattr__(self, "X", as_matrix(self.X, "X"))
        object.__setattr__(self, "Z", as_matrix(self.Z, "Z"))

    @property
    def dims(self):
        """(n, q, p, k)"""
        (n, p), (k, q) = self.X.shape, self.Z.shape
        return n, q, p, k


@dataclass(frozen=True)
class GroundTruth:
    M_star: np.ndarray
    rank_target: int
    variant: ModelVariant


@dataclass(frozen=True)
class ObservationSet:
    """Observed response cells as parallel (rows, cols, values) arrays."""

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    mode: ObservationMode
    shape: tuple

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise ValueError("rows, cols and values must be 1-D arrays of equal length")
        n, q = self.shape
        if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= q):
            raise ValueError(f"observation indices out of range for shape {self.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("observed values must be finite")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "shape", (int(n), int(q)))

    def __len__(self):
        return self.values.size

    def counts(self):
        """Number of observations falling in each cell (n x q)."""
        W = np.zeros(self.shape)
        np.add.at(W, (self.rows, self.cols), 1.0)
        return W

    def sums(self):
        """Sum of observed values in each cell (n x q)."""
        S = np.zeros(self.shape)
        np.add.at(S, (self.rows, self.cols), self.values)
        return S

    def cell_means(self):
        """Per-cell average of the observations and the boolean observed mask."""
        W = self.counts()
        mask = W > 0
        means = np.zeros(self.shape)
        means[mask] = self.sums()[mask] / W[mask]
        return means, mask

    def is_complete(self):
        return bool(np.all(self.counts() == 1))

    def permuted(self, order):
        order = np.asarray(order)
        return ObservationSet(self.rows[order], self.cols[order], self.values[order],
                              self.mode, self.shape)


def child_seed(seed, stream):
    """Independent, reproducible sub-stream ``stream`` of a replication seed."""
    return np.random.SeedSequence([int(seed), int(stream)])


def gen_designs(n, p, k, q, rng_seed):
    rng = np.random.default_rng(rng_seed)
    X = rng.standard_normal((n, p))
    Z = rng.standard_normal((k, q))
    return DesignPair(X, Z)


def gen_coefficient(p, k, variant, rng_seed):
    """True coefficient matrix for Model I (rank 2) or Model II (rank 2 plus noise)."""
    variant = ModelVariant(variant)
    if p < 2 or k < 2:
        raise ValueError("both coefficient dimensions must be at least 2")
    rng = np.random.default_rng(rng_seed)
    B1 = rng.standard_normal((p, 2))
    B2 = rng.standard_normal((k, 2))
    if variant is ModelVariant.EXACT_LOW_RANK:
        M = B1 @ B2.T
    else:
        U = rng.normal(0.0, math.sqrt(APPROX_PERTURBATION_VARIANCE), size=(p, k))
        M = 2.0 * B1 @ B2.T + U
    return GroundTruth(M, 2, variant)


def gen_response(designs, truth, noise_sd, rng_seed):
    """Y = X M* Z + E with i.i.d. N(0, noise_sd^2) noise."""
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    M = truth.M_star if isinstance(truth, GroundTruth) else as_matrix(truth, "M")
    X, Z = designs.X, designs.Z
    if X.shape[1] != M.shape[0] or M.shape[1] != Z.shape[0]:
        raise ValueError(f"incompatible shapes X{X.shape}, M{M.shape}, Z{Z.shape}")
    signal = X @ (M @ Z)
    rng = np.random.default_rng(rng_seed)
    noise = rng.standard_normal(signal.shape)
    if noise_sd == 0:
        return signal
    return signal + noise_sd * noise


def full_observations(Y):
    Y = as_matrix(Y, "Y")
    n, q = Y.shape
    rows, cols = np.divmod(np.arange(n * q), q)
    return ObservationSet(rows, cols, Y.ravel().copy(), ObservationMode.FULL, (n, q))


def n_kept(kappa, n, q):
    # guard against 0.7 * 100 = 70.00000000000001 style round-up
    return int(math.ceil(round((1.0 - kappa) * n * q, 9)))


def sample_observations(Y, mode, kappa_or_m=None, rng_seed=None):
    """Draw an observation set from a complete response matrix.

    Args:
        Y: Complete n x q response.
        mode: FULL, MASKED (``kappa_or_m`` is the missing rate kappa; the
            ``ceil((1 - kappa) n q)`` kept cells form a uniform subset) or
            IID (``kappa_or_m`` is the number m of uniform draws, repeats
            allowed).
    """
    Y = as_matrix(Y, "Y")
    mode = ObservationMode(mode)
    n, q = Y.shape
    if mode is ObservationMode.FULL:
        return full_observations(Y)
    rng = np.random.default_rng(rng_seed)
    if mode is ObservationMode.MASKED:
        kappa = float(kappa_or_m)
        if not 0.0 <= kappa < 1.0:
            raise ValueError(f"missing rate must lie in [0, 1), got {kappa}")
        flat = np.sort(rng.choice(n * q, size=n_kept(kappa, n, q), replace=False))
    else:
        m = int(kappa_or_m)
        if m < 1:
            raise ValueError(f"number of draws must be >= 1, got {m}")
        flat = rng.integers(0, n * q, size=m)
    rows, cols = np.divmod(flat, q)
    return ObservationSet(rows, cols, Y[rows, cols], mode, (n, q))

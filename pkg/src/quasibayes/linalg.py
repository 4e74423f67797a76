"""Dense matrix helpers shared by the estimators and samplers."""

import numpy as np


def as_matrix(A, name="matrix"):
    """Return ``A`` as a finite 2-D float array, raising ValueError otherwise."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def clip_project(A, C):
    """Project ``A`` onto matrices with sup-norm at most ``C``.

    Entrywise clamping is the Frobenius-nearest point of the box, so no
    optimisation is needed.
    """
    if not C > 0:
        raise ValueError(f"clip level must be positive, got {C}")
    return np.clip(as_matrix(A), -C, C)


def frobenius_norm_sq(A):
    A = as_matrix(A)
    return float(np.sum(A * A))


def weighted_frobenius_norm_sq(A, P):
    """Squared Frobenius norm with cell weights ``P`` (a sampling distribution).

    Args:
        A: Matrix of shape (n1, n2).
        P: Nonnegative weights of the same shape summing to one.
    """
    A = as_matrix(A)
    P = np.asarray(P, dtype=float)
    if P.shape != A.shape:
        raise ValueError(f"weights shape {P.shape} does not match matrix shape {A.shape}")
    if np.any(P < 0) or abs(P.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to 1")
    return float(np.sum(P * A * A))


def uniform_distribution(shape):
    n1, n2 = shape
    return np.full((n1, n2), 1.0 / (n1 * n2))


def pseudo_inverse(A):
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``1e-12 * max(rows, cols) * s_max`` are treated
    as zero.
    """
    A = as_matrix(A)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((A.shape[1], A.shape[0]))
    cutoff = 1e-12 * max(A.shape) * s[0]
    s_inv = np.zeros_like(s)
    keep = s > cutoff
    s_inv[keep] = 1.0 / s[keep]
    return (Vt.T * s_inv) @ U.T


def truncated_svd(A, r):
    """Leading ``r`` singular triplets of ``A``.

    Returns:
        (U, S, V) with U of shape (rows, r), S of length r in nonincreasing
        order and V of shape (cols, r), so that ``U @ diag(S) @ V.T`` is the
        best rank-``r`` approximation of ``A``.
    """
    A = as_matrix(A)
    if not (isinstance(r, (int, np.integer)) and 1 <= r <= min(A.shape)):
        raise ValueError(f"rank must be an integer in [1, {min(A.shape)}], got {r}")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    return U[:, :r], s[:r], Vt[:r].T


def low_rank_approx(A, r):
    U, S, V = truncated_svd(A, r)
    return (U * S) @ V.T


def spectral_norm(A):
    return float(np.linalg.norm(as_matrix(A), 2))

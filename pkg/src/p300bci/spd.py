"""Geometry of symmetric positive definite (SPD) matrices.

Extended-covariance features live on the SPD manifold.  This module provides
the affine-invariant distance, the iterative geometric mean used to fit class
centers, and the validation helper that puts raw matrices onto the manifold.

All functions operate on plain numpy arrays: an "SPD matrix" here is any
square float array accepted by :func:`validate_spd`.  Everything is pure and
thread-safe.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    MeanConvergenceWarning,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
)

__all__ = [
    "validate_spd",
    "affine_distance",
    "squared_affine_distance",
    "karcher_mean",
    "logm_spd",
    "expm_sym",
]

# Relative asymmetry beyond which a matrix is rejected instead of being
# silently symmetrized.
SYMMETRY_RTOL = 1e-10


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.swapaxes(-1, -2))


def _eigh_apply(a: np.ndarray, fun) -> np.ndarray:
    """Apply ``fun`` to the eigenvalues of symmetric ``a`` in its eigenbasis."""
    w, v = np.linalg.eigh(a)
    return _sym((v * fun(w)[..., None, :]) @ v.swapaxes(-1, -2))


def logm_spd(a: np.ndarray) -> np.ndarray:
    """Matrix logarithm of an SPD matrix (eigenvalue-wise log)."""
    return _eigh_apply(a, np.log)


def expm_sym(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a symmetric matrix (eigenvalue-wise exp)."""
    return _eigh_apply(a, np.exp)


def validate_spd(matrix, tol: float = 1e-10) -> np.ndarray:
    """Check that ``matrix`` is on the SPD manifold and return a clean copy.

    The input is symmetrized (asymmetry up to ``SYMMETRY_RTOL`` relative is
    tolerated, anything larger raises) and its spectrum is checked: every
    eigenvalue must exceed ``tol * trace / order``.

    Raises
    ------
    NotSquare, NotSymmetric, NotPositiveDefinite
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {a.shape}")
    scale = np.abs(a).max()
    asym = np.abs(a - a.T).max()
    if asym > SYMMETRY_RTOL * max(scale, 1e-300):
        raise NotSymmetric(
            f"asymmetry {asym:.3e} exceeds relative tolerance {SYMMETRY_RTOL:g}"
        )
    s = _sym(a)
    order = s.shape[0]
    w = np.linalg.eigvalsh(s)
    threshold = tol * np.trace(s) / order
    if w[0] <= threshold:
        raise NotPositiveDefinite(
            f"minimum eigenvalue {w[0]:.3e} not above threshold {threshold:.3e}"
        )
    return s


def _check_same_order(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"matrix orders differ: {a.shape} vs {b.shape}")


def _whiten(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return the symmetrized whitened matrix a^{-1/2} b a^{-1/2}."""
    w, v = np.linalg.eigh(_sym(a))
    if w[0] <= 0:
        raise NotPositiveDefinite("reference matrix is not positive definite")
    isq = (v / np.sqrt(w)) @ v.T
    return _sym(isq @ b @ isq)


def squared_affine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Squared affine-invariant distance between two SPD matrices."""
    a = np.asarray(a)
    b = np.asarray(b)
    _check_same_order(a, b)
    if a is b or np.array_equal(a, b):
        return 0.0
    w = np.linalg.eigvalsh(_whiten(a, b))
    if w[0] <= 0:
        raise NotPositiveDefinite("second matrix is not positive definite")
    return float(np.sum(np.log(w) ** 2))


def affine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Affine-invariant distance: sqrt of the summed squared log-eigenvalues
    of the whitened matrix a^{-1/2} b a^{-1/2}.

    Symmetric in its arguments, zero iff ``a == b``, and invariant under
    congruence transforms a -> g a g^T.
    """
    return float(np.sqrt(squared_affine_distance(a, b)))


def _mean_stats(samples: np.ndarray, m: np.ndarray):
    """One whitening pass of the geometric-mean iteration.

    Returns the summed squared distance of the samples to ``m`` (the
    objective), the sum of tangent-space logarithms at ``m`` (the gradient,
    up to a factor -2), and m^{1/2}.
    """
    w, v = np.linalg.eigh(_sym(m))
    if w[0] <= 0:
        raise NotPositiveDefinite("mean iterate left the SPD cone")
    isq = (v / np.sqrt(w)) @ v.T
    sq = (v * np.sqrt(w)) @ v.T
    whitened = _sym(isq @ samples @ isq)
    ew, ev = np.linalg.eigh(whitened)
    if ew.min() <= 0:
        raise NotPositiveDefinite("a sample is not positive definite")
    log_ew = np.log(ew)
    objective = float(np.sum(log_ew**2))
    logs = _sym((ev * log_ew[..., None, :]) @ ev.swapaxes(-1, -2))
    gradient = logs.sum(axis=0)
    return objective, gradient, sq


def karcher_mean(
    samples,
    tol: float = 1e-8,
    max_iter: int = 50,
) -> np.ndarray:
    """Geometric (Karcher) mean of SPD matrices under the affine metric.

    Standard fixed-point scheme: map the samples to the tangent space at the
    current estimate through the matrix logarithm, average, and map back
    through the matrix exponential.  The step starts at 1 and is halved
    whenever the summed squared distance increases.  Iteration stops when the
    Frobenius norm of the tangent-space gradient (the sum of the logarithms)
    drops to ``tol``.

    If ``max_iter`` is exhausted first, the best estimate is returned and a
    :class:`MeanConvergenceWarning` reports the residual gradient norm.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    arr = [np.asarray(s, dtype=float) for s in samples]
    if not arr:
        raise EmptyInput("cannot average an empty list of matrices")
    for s in arr[1:]:
        _check_same_order(arr[0], s)
    if all(np.array_equal(arr[0], s) for s in arr[1:]):
        return _sym(arr[0])
    stack = np.stack(arr)

    m = _sym(stack.mean(axis=0))
    objective, gradient, sq = _mean_stats(stack, m)
    n = len(arr)
    for _ in range(max_iter):
        grad_norm = float(np.linalg.norm(gradient))
        if grad_norm <= tol:
            return _sym(m)
        step = 1.0
        while True:
            candidate = _sym(sq @ expm_sym(step * gradient / n) @ sq)
            cand_objective, cand_gradient, cand_sq = _mean_stats(stack, candidate)
            # near the fixed point the objective is flat to rounding while the
            # gradient still contracts, so compare with a relative slack and
            # stop halving at a floor rather than refusing to move
            if cand_objective <= objective * (1.0 + 1e-12) or step < 2.0**-10:
                break
            step *= 0.5
        m, objective, gradient, sq = candidate, cand_objective, cand_gradient, cand_sq

    grad_norm = float(np.linalg.norm(gradient))
    if grad_norm > tol:
        warnings.warn(
            f"geometric mean stopped after {max_iter} iterations with gradient "
            f"norm {grad_norm:.3e} > tol {tol:g}",
            MeanConvergenceWarning,
            stacklevel=2,
        )
    return _sym(m)

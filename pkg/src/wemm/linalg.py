"""Small dense linear algebra helpers for the d x d matrices used by the learners.

Everything works on plain float64 numpy arrays. Matrices returned by this
module are re-symmetrized so that long recursions do not drift.
"""
import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, InvalidParameter, NotPositiveDefinite

PIVOT_TOL = 1e-12


def as_vec(v, d=None):
    """Return ``v`` as a finite 1-d float64 array, optionally of length ``d``."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidParameter(f"expected a vector, got shape {arr.shape}")
    if d is not None and arr.shape[0] != d:
        raise InvalidParameter(f"expected length {d}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter("vector has non-finite entries")
    return arr


def as_sym(M, d=None):
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidParameter(f"expected a square matrix, got shape {arr.shape}")
    if d is not None and arr.shape[0] != d:
        raise InvalidParameter(f"expected a {d}x{d} matrix, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter("matrix has non-finite entries")
    return arr


def symmetrize(M):
    return 0.5 * (M + M.T)


def _cholesky(M):
    M = as_sym(M)
    try:
        c, lower = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(c) ** 2
    if np.min(pivots) <= PIVOT_TOL:
        raise NotPositiveDefinite(f"pivot {np.min(pivots):.3e} <= {PIVOT_TOL}")
    return c, lower


def solve_spd(M, v):
    """Solve ``M z = v`` for a symmetric positive definite ``M`` via Cholesky."""
    factor = _cholesky(M)
    v = as_vec(v, factor[0].shape[0])
    return scipy.linalg.cho_solve(factor, v, check_finite=False)


def inv_spd(M):
    factor = _cholesky(M)
    inv = scipy.linalg.cho_solve(factor, np.eye(factor[0].shape[0]), check_finite=False)
    return symmetrize(inv)


def log_det(M):
    """Natural log of ``det(M)`` for SPD ``M``."""
    c, _ = _cholesky(M)
    return float(2.0 * np.sum(np.log(np.diag(c))))


def rank_one_update(M, scale, v):
    """Return ``M + scale * v v^T`` (a new, symmetric matrix)."""
    M = as_sym(M)
    v = as_vec(v, M.shape[0])
    scale = float(scale)
    if not np.isfinite(scale):
        raise InvalidParameter("scale must be finite")
    return symmetrize(M + scale * np.outer(v, v))


def sym_eigen(M):
    """Eigen-decomposition of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in
    descending order and eigenvectors stored as orthonormal columns.
    """
    M = symmetrize(as_sym(M))
    try:
        vals, vecs = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from None
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def quad_form(M, x):
    return float(x @ M @ x)

"""Dense kernels: thin SVD with a sign convention, Procrustes, orthonormalization."""

import logging

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "NumericError",
    "thin_svd",
    "procrustes_max_trace",
    "orthonormal_columns",
]


class NumericError(ArithmeticError):
    """Raised when a numeric routine fails or produces non-finite values."""


def _as_finite_2d(A, what="matrix"):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{what} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{what} must be non-empty, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericError(f"{what} of shape {A.shape} has non-finite entries")
    return A


def thin_svd(A):
    """
    Thin singular value decomposition ``A = U @ diag(S) @ V.T``.

    Singular vectors are sign-normalized so that the largest-magnitude entry
    of every column of ``U`` is positive (first such entry on ties), with the
    matching column of ``V`` flipped along. This makes the factors
    reproducible for a given input.

    Parameters
    ----------
    A : (p, q) array_like

    Returns
    -------
    U : (p, r) ndarray
    S : (r,) ndarray, non-negative, non-increasing
    V : (q, r) ndarray
        with ``r = min(p, q)``.
    """
    A = _as_finite_2d(A)
    try:
        U, S, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD did not converge for matrix of shape {A.shape}") from exc
    V = Vt.T
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    U = U * signs
    V = V * signs
    return U, S, V


def procrustes_max_trace(H):
    """
    Maximize ``Tr(G.T @ H)`` over matrices with orthonormal columns.

    Returns ``G = U @ V.T`` from the thin SVD of ``H``. The attained trace is
    the nuclear norm of ``H``. When ``H`` has fewer rows than columns no
    column-orthonormal ``G`` exists; the same formula then yields a matrix
    with orthonormal rows, which maximizes the trace over the spectral-norm
    unit ball.
    """
    H = _as_finite_2d(H, "Procrustes target")
    p, q = H.shape
    if p < q:
        logger.debug("Procrustes target %dx%d is wide; returning row-orthonormal maximizer", p, q)
    U, _, V = thin_svd(H)
    return U @ V.T


def orthonormal_columns(A=None, seed=None, shape=None):
    """
    Orthonormal basis for the column space of ``A``.

    Uses a thin QR with column signs fixed so ``diag(R) >= 0``. When ``A``
    is omitted, or has numerically zero norm, a seeded Gaussian ``shape``
    matrix is orthonormalized instead.

    Returns
    -------
    Q : ndarray with orthonormal columns, same shape as ``A`` (or ``shape``)
    fallback : bool
        True when the seeded random draw was used.
    """
    fallback = False
    if A is None:
        if shape is None:
            raise ValueError("either A or shape is required")
        A = np.zeros(shape)
    A = np.asarray(A, dtype=np.float64)
    p, q = A.shape
    if q > p:
        raise ValueError(f"cannot orthonormalize {q} columns in dimension {p}")
    if not np.any(A):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((p, q))
        fallback = True
    A = _as_finite_2d(A)
    Q, R = np.linalg.qr(A)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s, fallback

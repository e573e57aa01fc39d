"""
Hot O(n) loops of the solvers, in two interchangeable flavours.

Every kernel exists as a numba ``@njit`` function and as a pure-numpy
function with the same signature. The numba path is used when numba imports
and ``AIMC_DISABLE_NUMBA`` is unset (or ``0``); set ``AIMC_DISABLE_NUMBA=1``
to force the numpy path. ``backend()`` reports the active choice and
``numba_kernels`` / ``numpy_kernels`` expose both sets to the benchmark.

All kernels take sample-major data, ``XT`` of shape ``(n, p)``, i.e. the
transpose of an in-memory ``p x n`` view.
"""

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    HAVE_NUMBA = False

_BLOCK = 4096


def _env_disabled():
    return os.environ.get("AIMC_DISABLE_NUMBA", "0").lower() not in ("", "0", "false", "no")


# ---------------------------------------------------------------------------
# numpy reference path


def _np_cluster_sums(XT, labels, k):
    n, p = XT.shape
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    order = np.argsort(labels, kind="stable")
    sums = np.zeros((k, p))
    starts = np.concatenate(([0], np.cumsum(counts[:-1]).astype(np.int64)))
    nonempty = counts > 0
    if n:
        red = np.add.reduceat(XT[order], starts[nonempty], axis=0)
        sums[nonempty] = red
    return sums.T.copy(), counts


def _np_nearest(S, t):
    cost = t[None, :] - 2.0 * S
    labels = np.argmin(cost, axis=1)
    best = cost[np.arange(S.shape[0]), labels]
    return labels.astype(np.int64), best


def _np_residual_sq(XT, C, labels):
    n = XT.shape[0]
    out = np.empty(n)
    CT = C.T
    for s in range(0, n, _BLOCK):
        e = min(s + _BLOCK, n)
        diff = XT[s:e] - CT[labels[s:e]]
        out[s:e] = np.einsum("ij,ij->i", diff, diff)
    return out


def _np_row_sq_norms(XT):
    return np.einsum("ij,ij->i", XT, XT)


# Procrustes maximizer U V^T. A tall, well-conditioned H goes through the
# polar factor H (H^T H)^{-1/2}, which is cheaper than an SVD but squares the
# condition number, so anything whose Gram eigenvalues spread by more than
# 1 / POLAR_MIN_RATIO (or any wide H) takes the SVD.
POLAR_MIN_RATIO = 1e-4


def _np_procrustes(H, try_polar=True):
    p, q = H.shape
    if try_polar and p >= q:
        w, V = np.linalg.eigh(H.T @ H)
        if w[0] > POLAR_MIN_RATIO * w[-1]:
            return H @ ((V / np.sqrt(w)) @ V.T)
    U, _, Vt = np.linalg.svd(H, full_matrices=False)
    return U @ Vt


numpy_kernels = SimpleNamespace(
    name="numpy",
    procrustes=_np_procrustes,
    cluster_sums=_np_cluster_sums,
    nearest=_np_nearest,
    residual_sq=_np_residual_sq,
    row_sq_norms=_np_row_sq_norms,
)


# ---------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _nb_cluster_sums_impl(XT, labels, k):
        n, p = XT.shape
        sums = np.zeros((k, p))
        counts = np.zeros(k)
        for j in range(n):
            c = labels[j]
            counts[c] += 1.0
            for f in range(p):
                sums[c, f] += XT[j, f]
        return sums, counts

    def _nb_cluster_sums(XT, labels, k):
        sums, counts = _nb_cluster_sums_impl(XT, labels, k)
        return sums.T.copy(), counts

    @njit(cache=True, nogil=True)
    def _nb_nearest(S, t):
        n, k = S.shape
        labels = np.empty(n, dtype=np.int64)
        best = np.empty(n)
        for j in range(n):
            bi = 0
            bv = t[0] - 2.0 * S[j, 0]
            for i in range(1, k):
                v = t[i] - 2.0 * S[j, i]
                # strict comparison keeps the smallest index on ties
                if v < bv:
                    bv = v
                    bi = i
            labels[j] = bi
            best[j] = bv
        return labels, best

    @njit(cache=True, nogil=True)
    def _nb_residual_sq(XT, C, labels):
        n, p = XT.shape
        out = np.empty(n)
        for j in range(n):
            c = labels[j]
            acc = 0.0
            for f in range(p):
                r = XT[j, f] - C[f, c]
                acc += r * r
            out[j] = acc
        return out

    @njit(cache=True, nogil=True)
    def _nb_row_sq_norms(XT):
        n, p = XT.shape
        out = np.empty(n)
        for j in range(n):
            acc = 0.0
            for f in range(p):
                acc += XT[j, f] * XT[j, f]
            out[j] = acc
        return out

    @njit(cache=True, nogil=True)
    def _nb_procrustes_impl(H, try_polar):
        p, q = H.shape
        if try_polar and p >= q:
            w, V = np.linalg.eigh(H.T @ H)
            if w[0] > POLAR_MIN_RATIO * w[-1]:
                return H @ ((V / np.sqrt(w)) @ V.T)
        U, _, Vt = np.linalg.svd(H, full_matrices=False)
        return U @ Vt

    def _nb_procrustes(H, try_polar=True):
        return _nb_procrustes_impl(np.ascontiguousarray(H, dtype=np.float64), try_polar)

    numba_kernels = SimpleNamespace(
        name="numba",
        procrustes=_nb_procrustes,
        cluster_sums=_nb_cluster_sums,
        nearest=_nb_nearest,
        residual_sq=_nb_residual_sq,
        row_sq_norms=_nb_row_sq_norms,
    )
else:  # pragma: no cover
    numba_kernels = None


def get_kernels(name=None):
    """Return the kernel set ``name`` ("numba"/"numpy"), or the active one."""
    if name is None:
        name = backend()
    if name == "numba":
        if numba_kernels is None:
            raise RuntimeError("numba backend requested but numba is not importable")
        return numba_kernels
    if name == "numpy":
        return numpy_kernels
    raise ValueError(f"unknown kernel backend {name!r}")


def backend():
    """Name of the kernel set selected by the environment."""
    if HAVE_NUMBA and not _env_disabled():
        return "numba"
    return "numpy"

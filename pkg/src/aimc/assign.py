"""Nearest-centroid assignment with empty-cluster repair, and k-means++ seeding."""

import numpy as np

from ._kernels import get_kernels


def nearest_with_repair(S, t, sample_norms, k, repair=True, kernels=None):
    """
    Assign every sample to ``argmin_i t[i] - 2 S[j, i]``.

    ``sample_norms[j]`` is the (weighted) squared norm of sample ``j``, so the
    cost of sample ``j`` in cluster ``i`` is ``sample_norms[j] + t[i] - 2 S[j, i]``.
    It may be a zero-argument callable; it is only evaluated when a repair
    is needed. Ties go to the smallest cluster index.

    With ``repair`` on, each empty cluster (in index order) receives the
    sample farthest from its own centroid among clusters holding more than
    one sample.

    Returns
    -------
    labels : (n,) int64
    raw_labels : (n,) int64
        Assignment before repair.
    moved : list of (sample, old_cluster, new_cluster)
    """
    kern = kernels or get_kernels()
    raw, best = kern.nearest(np.ascontiguousarray(S), np.ascontiguousarray(t))
    labels = raw.copy()
    moved = []
    if not repair:
        return labels, raw, moved
    counts = np.bincount(labels, minlength=k)
    if counts.min() > 0:
        return labels, raw, moved
    if callable(sample_norms):
        sample_norms = sample_norms()
    dist = sample_norms + best
    for i in np.flatnonzero(counts == 0):
        movable = counts[labels] > 1
        if not movable.any():
            break
        cand = np.where(movable, dist, -np.inf)
        j = int(np.argmax(cand))
        old = int(labels[j])
        labels[j] = i
        counts[old] -= 1
        counts[i] += 1
        dist[j] = sample_norms[j] + t[i] - 2.0 * S[j, i]
        moved.append((j, old, int(i)))
    return labels, raw, moved


def zscore_concat(ds):
    """Sample-major ``(n, h)`` concatenation of z-scored views."""
    blocks = []
    for v in range(ds.m):
        XT = ds.sample_major(v)
        mu = XT.mean(axis=0)
        sd = XT.std(axis=0)
        sd[sd == 0] = 1.0
        blocks.append((XT - mu) / sd)
    return np.hstack(blocks)


def kmeans_plusplus(Z, k, rng, sq_norms=None):
    """k-means++ seeding over the rows of ``Z``; returns ``(k, h)`` centers."""
    n = Z.shape[0]
    if sq_norms is None:
        sq_norms = np.einsum("ij,ij->i", Z, Z)
    centers = np.empty((k, Z.shape[1]))

    def dist_to(c):
        return np.maximum(sq_norms + c @ c - 2.0 * (Z @ c), 0.0)

    centers[0] = Z[rng.integers(n)]
    d2 = dist_to(centers[0])
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[c] = Z[idx]
        d2 = np.minimum(d2, dist_to(centers[c]))
    return centers


def kmeans(Z, k, seed, n_init=10, max_iter=100, kernels=None):
    """
    Lloyd's k-means with k-means++ seeding; best of ``n_init`` restarts.

    Deterministic given ``seed``. Returns ``(labels, inertia)``.
    """
    kern = kernels or get_kernels()
    rng = np.random.default_rng(seed)
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    norms = kern.row_sq_norms(Z)
    best_labels, best_inertia = None, np.inf
    for _ in range(n_init):
        centers = kmeans_plusplus(Z, k, rng, norms)
        labels = None
        for _ in range(max_iter):
            S = Z @ centers.T
            t = np.einsum("ij,ij->i", centers, centers)
            new, _, _ = nearest_with_repair(S, t, norms, k, repair=True, kernels=kern)
            if labels is not None and np.array_equal(new, labels):
                break
            labels = new
            sums, counts = kern.cluster_sums(Z, labels, k)
            nz = counts > 0
            centers[nz] = (sums[:, nz] / counts[nz]).T
        inertia = float(np.sum(kern.residual_sq(Z, centers.T.copy(), labels)))
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels, best_inertia

"""Small instance builders shared across test modules."""

import numpy as np

from aimc.io import SyntheticSpec, gen_synthetic
from aimc.model import ModelState, MultiviewDataset


def random_dataset(rng, n, dims, k=None):
    views = [rng.standard_normal((p, n)) for p in dims]
    labels = rng.integers(0, k, size=n) if k else None
    return MultiviewDataset(views, labels=labels, declared_k=k)


def random_state(rng, ds, d, k):
    """A valid ModelState with random orthonormal factors and positive weights."""
    gens = []
    for p in ds.dims:
        if p >= d:
            G, _ = np.linalg.qr(rng.standard_normal((p, d)))
        else:
            Gt, _ = np.linalg.qr(rng.standard_normal((d, p)))
            G = Gt.T
        gens.append(G)
    F, _ = np.linalg.qr(rng.standard_normal((d, k)))
    labels = rng.integers(0, k, size=ds.n).astype(np.int64)
    labels[:k] = np.arange(k)
    weights = rng.uniform(0.2, 2.0, size=ds.m)
    return ModelState(gens, F, labels, weights, d, k)


def planted(n=500, m=3, k=5, d=8, dims=(40, 30, 20), sigma=0.01, seed=0, **kw):
    return gen_synthetic(SyntheticSpec(n=n, m=m, k=k, d=d, view_dims=list(dims),
                                       noise_sigma=sigma, seed=seed, **kw))


def dense_residuals(state, ds):
    """Per-view Frobenius residuals with G F Y materialized."""
    Y = np.zeros((state.k, ds.n))
    Y[state.assignment, np.arange(ds.n)] = 1.0
    return np.array([np.linalg.norm(X - G @ state.centroids @ Y) for X, G in zip(ds.views, state.generators)])


def weighted_squared(state, ds):
    return float(np.sum(state.weights * dense_residuals(state, ds) ** 2))

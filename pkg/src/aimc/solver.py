"""
AIMC: alternating minimization over view generators, centroids, assignment
and adaptive view weights.

Model: every view is approximated as ``X_v ~ G_v @ F @ Y`` with
column-orthonormal ``G_v`` (``d_v x d``), column-orthonormal ``F``
(``d x k``) and a one-hot indicator ``Y`` (``k x n``, stored as labels).
The solver minimizes ``sum_v ||X_v - G_v F Y||_F`` by reweighting:
with ``alpha_v = 1 / (2 ||X_v - G_v F Y||_F)`` fixed, each block update
lowers ``sum_v alpha_v ||X_v - G_v F Y||_F^2``.

Views with ``d_v < d`` cannot carry a column-orthonormal ``G_v``. For those
the generator has orthonormal rows, and the G- and F-steps use a majorized
Procrustes target so every step is still a descent step. With every
``d_v >= d`` the updates reduce to plain Procrustes on ``X Y^T F^T`` and
``sum_v alpha_v G_v^T X_v Y^T``.
"""

import logging
import math
import time
from dataclasses import replace

import numpy as np

from ._kernels import get_kernels
from .assign import kmeans, nearest_with_repair, zscore_concat
from .linalg import NumericError, procrustes_max_trace, thin_svd
from .model import ModelState, Objective, SolveResult

logger = logging.getLogger(__name__)

PHASES = ("G", "F", "Y", "alpha")


def cluster_stats(ds, assignment, k, kernels=None):
    """Per-view cluster sums ``X_v @ Y.T`` (``d_v x k``) and cluster sizes."""
    kern = kernels or get_kernels()
    labels = np.ascontiguousarray(assignment, dtype=np.int64)
    sums = []
    counts = None
    for v in range(ds.m):
        Z, counts = kern.cluster_sums(ds.sample_major(v), labels, k)
        sums.append(Z)
    return sums, counts


def fast_procrustes(H, kernels=None, full_rank_possible=True):
    """
    Lean :func:`~aimc.linalg.procrustes_max_trace` for the iteration loop:
    no sign normalization, polar factor when ``H`` is well conditioned.
    Pass ``full_rank_possible=False`` when ``H`` is known to be rank
    deficient to go straight to the SVD. Falls back to the checked routine
    if the result is not finite.
    """
    kern = kernels or get_kernels()
    try:
        G = kern.procrustes(H, full_rank_possible)
    except np.linalg.LinAlgError:
        G = None
    if G is not None and np.isfinite(G).all():
        return G
    return procrustes_max_trace(H)


def _initial_generator(X, d):
    p = X.shape[0]
    U, _, _ = thin_svd(X)
    if p >= d:
        return U[:, :d].copy()
    # d_v < d: orthonormal rows spanning the full view space
    G = np.zeros((p, d))
    G[:, :p] = U[:, :p]
    return G


def _initial_labels(ds, cfg, kernels):
    if cfg.init_mode == "random":
        rng = np.random.default_rng(cfg.seed)
        return rng.permutation(np.arange(ds.n) % cfg.k).astype(np.int64)
    labels, _ = kmeans(zscore_concat(ds), cfg.k, cfg.seed, kernels=kernels)
    return labels.astype(np.int64)


def init_state(ds, cfg, kernels=None):
    """
    Deterministic starting point.

    ``alpha_v = 1/m``; ``G_v`` spans the top-``d`` left singular subspace of
    ``X_v``; the assignment comes from seeded k-means++ on the concatenated
    z-scored views (or a balanced random permutation); ``F`` is one
    closed-form centroid step from these.
    """
    cfg.validate(ds)
    kern = kernels or get_kernels()
    for v, p in enumerate(ds.dims):
        if p < cfg.d:
            logger.warning("view %d (%s): d_v=%d < d=%d, generator is rank-limited",
                           v, ds.view_names[v], p, cfg.d)
    generators = [_initial_generator(X, cfg.d) for X in ds.views]
    labels = _initial_labels(ds, cfg, kern)
    weights = np.full(ds.m, 1.0 / ds.m)
    sums, _ = cluster_stats(ds, labels, cfg.k, kern)
    J = _centroid_target(generators, sums, weights, cfg.d, cfg.k)
    F = procrustes_max_trace(J)
    return ModelState(generators, F, labels, weights, cfg.d, cfg.k)


def _centroid_target(generators, sums, weights, d, k):
    J = np.zeros((d, k))
    for G, Z, a in zip(generators, sums, weights):
        J += a * (G.T @ Z)
    return J


def update_generators(state, ds, stats=None, kernels=None):
    """
    Procrustes step for every ``G_v`` with ``F``, ``Y`` fixed.

    ``H_v = X_v Y^T F^T``; ``G_v = U V^T`` from the SVD of ``H_v``. For
    ``d_v < d`` the target gains ``G_v (mu I - F N F^T)`` (``N`` the
    cluster sizes, ``mu`` their maximum), which majorizes the
    non-constant ``||G_v F Y||^2`` term.
    """
    sums, counts = stats or cluster_stats(ds, state.assignment, state.k, kernels)
    F = state.centroids
    curvature = None
    generators = []
    for G, Z in zip(state.generators, sums):
        H = Z @ F.T
        # Z F^T has rank <= k, so only the majorized target can be full rank
        full_rank = state.d <= state.k
        if G.shape[0] < state.d:
            full_rank = True
            if curvature is None:
                B = (F * counts) @ F.T
                mu = max(float(counts.max()), float(np.linalg.eigvalsh(B).max()))
                curvature = mu * np.eye(state.d) - B
            H = H + G @ curvature
        generators.append(fast_procrustes(H, kernels, full_rank))
    return replace(state, generators=generators)


def update_centroids(state, ds, stats=None, kernels=None):
    """
    Procrustes step for ``F`` with ``J = sum_v alpha_v G_v^T X_v Y^T``.

    If some view has ``d_v < d`` the weighted generator Gram
    ``Q = sum_v alpha_v G_v^T G_v`` is not a multiple of the identity and
    ``(lambda_max(Q) I - Q) F N`` is added to ``J``.
    """
    sums, counts = stats or cluster_stats(ds, state.assignment, state.k, kernels)
    J = _centroid_target(state.generators, sums, state.weights, state.d, state.k)
    if any(G.shape[0] < state.d for G in state.generators):
        Q = np.zeros((state.d, state.d))
        for G, a in zip(state.generators, state.weights):
            Q += a * (G.T @ G)
        lam = float(np.linalg.eigvalsh(Q).max())
        J = J + (lam * np.eye(state.d) - Q) @ state.centroids * counts
    return replace(state, centroids=fast_procrustes(J, kernels))


def _assignment_scores(state, ds):
    F = state.centroids
    S = np.zeros((ds.n, state.k))
    t = np.zeros(state.k)
    for v, (G, a) in enumerate(zip(state.generators, state.weights)):
        C = G @ F
        S += a * (ds.sample_major(v) @ C)
        t += a * np.einsum("ij,ij->j", C, C)
    return S, t


def _weighted_sample_norms(state, ds, kern):
    out = np.zeros(ds.n)
    for v, a in enumerate(state.weights):
        out += a * kern.row_sq_norms(ds.sample_major(v))
    return out


def update_assignments(state, ds, repair=True, kernels=None, return_info=False):
    """
    Move every sample to its weighted-nearest reconstructed centroid.

    Cluster ``i`` of view ``v`` sits at ``(G_v F)[:, i]``; the score
    ``t_i - 2 S_ji`` with ``S = sum_v alpha_v X_v^T G_v F`` and
    ``t_i = sum_v alpha_v ||(G_v F)[:, i]||^2`` ranks clusters exactly as
    the weighted squared distance does.
    """
    kern = kernels or get_kernels()
    S, t = _assignment_scores(state, ds)
    labels, raw, moved = nearest_with_repair(
        S, t, lambda: _weighted_sample_norms(state, ds, kern), state.k, repair, kern
    )
    new = replace(state, assignment=labels)
    if return_info:
        return new, {"raw_assignment": raw, "moved": moved}
    return new


def update_weights(state, ds=None, residuals=None, epsilon=1e-12, kernels=None):
    """``alpha_v = 1 / (2 max(r_v, epsilon))`` with ``r_v`` the view residual norm."""
    if residuals is None:
        residuals = objective(state, ds, kernels).per_view
    r = np.asarray(residuals, dtype=np.float64)
    return replace(state, weights=1.0 / (2.0 * np.maximum(r, epsilon)))


def objective(state, ds, kernels=None):
    """
    Residual norms ``r_v = ||X_v - G_v F Y||_F``.

    Streams over samples: ``G_v F Y`` is never formed as a ``d_v x n``
    matrix.
    """
    kern = kernels or get_kernels()
    if len(state.generators) != ds.m:
        raise ValueError(f"state has {len(state.generators)} generators, dataset has {ds.m} views")
    labels = np.ascontiguousarray(state.assignment, dtype=np.int64)
    if labels.shape[0] != ds.n:
        raise ValueError(f"assignment has length {labels.shape[0]}, dataset has n={ds.n}")
    per_view = np.empty(ds.m)
    for v, G in enumerate(state.generators):
        if G.shape[0] != ds.dims[v]:
            raise ValueError(f"generator {v} has {G.shape[0]} rows, view has d_v={ds.dims[v]}")
        C = np.ascontiguousarray(G @ state.centroids)
        per_view[v] = math.sqrt(float(np.sum(kern.residual_sq(ds.sample_major(v), C, labels))))
    unsquared = float(sum(per_view.tolist()))
    weighted = float(sum((state.weights * per_view**2).tolist()))
    return Objective(unsquared, weighted, per_view)


def _weighted(weights, per_view):
    return float(sum((weights * per_view**2).tolist()))


def solve(ds, cfg, kernels=None, stop_on_convergence=True):
    """
    Run the alternating minimization to convergence.

    Each iteration updates, in order, the generators, the centroid matrix,
    the assignment and the view weights, then records
    ``(iteration, sum_v r_v, sum_v alpha_v r_v^2)`` with the weights used
    during that iteration. Stops when the relative change of ``sum_v r_v``
    drops below ``cfg.tol`` or after ``cfg.max_iters`` iterations.

    An empty-cluster repair is kept only when the iteration still ends at
    or below its starting weighted objective; otherwise the unrepaired
    assignment is used. This keeps ``sum_v r_v`` non-increasing.
    """
    kern = kernels or get_kernels()
    timings = {p: 0.0 for p in PHASES}
    t0 = time.perf_counter()
    state = init_state(ds, cfg, kern)
    timings["init"] = time.perf_counter() - t0

    obj = objective(state, ds, kern)
    prev = obj.unsquared
    start_weighted = obj.weighted_squared
    trace, iter_times = [], []
    flags = {"rank_limited_views": [v for v, p in enumerate(ds.dims) if p < cfg.d],
             "repairs": 0, "repairs_reverted": 0, "degenerate_weights": []}
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        t_iter = time.perf_counter()

        t = time.perf_counter()
        stats = cluster_stats(ds, state.assignment, cfg.k, kern)
        state = update_generators(state, ds, stats, kern)
        timings["G"] += time.perf_counter() - t

        t = time.perf_counter()
        state = update_centroids(state, ds, stats, kern)
        timings["F"] += time.perf_counter() - t

        t = time.perf_counter()
        state, info = update_assignments(state, ds, cfg.repair_empty_clusters, kern, return_info=True)
        timings["Y"] += time.perf_counter() - t

        t = time.perf_counter()
        obj = objective(state, ds, kern)
        if info["moved"]:
            flags["repairs"] += len(info["moved"])
            if obj.weighted_squared > start_weighted:
                flags["repairs_reverted"] += len(info["moved"])
                state = replace(state, assignment=info["raw_assignment"])
                obj = objective(state, ds, kern)
        if not math.isfinite(obj.unsquared):
            raise NumericError(f"non-finite objective at iteration {it}")
        state = update_weights(state, residuals=obj.per_view, epsilon=cfg.epsilon)
        degenerate = [v for v, r in enumerate(obj.per_view) if r < cfg.epsilon]
        if degenerate:
            flags["degenerate_weights"] = degenerate
        start_weighted = _weighted(state.weights, obj.per_view)
        timings["alpha"] += time.perf_counter() - t

        trace.append((it, obj.unsquared, obj.weighted_squared))
        iter_times.append(time.perf_counter() - t_iter)
        change = abs(prev - obj.unsquared) / max(prev, cfg.epsilon)
        prev = obj.unsquared
        if stop_on_convergence and change < cfg.tol:
            converged = True
            break
    timings["total"] = time.perf_counter() - t0
    return SolveResult(
        state=state,
        objective_trace=trace,
        per_view_residuals=obj.per_view,
        converged=converged,
        iters_run=it,
        timings=timings,
        method="aimc",
        iteration_times=iter_times,
        flags=flags,
    )

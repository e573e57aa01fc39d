"""
NONMF baseline: per-view orthogonal centroid matrices with a shared indicator.

Minimizes ``sum_v ||X_v - F_v Y||_F^2`` with column-orthonormal ``F_v``
(``d_v x k``) and one-hot ``Y``, alternating a Procrustes step per view and a
nearest-centroid step. There is no latent space and no view weighting.
When ``d_v < k`` the ``F_v`` step is majorized as in the AIMC generator step.
"""

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from ._kernels import get_kernels
from .assign import nearest_with_repair
from .linalg import NumericError, procrustes_max_trace
from .model import SolveResult
from .solver import _initial_labels, cluster_stats, fast_procrustes


@dataclass(frozen=True)
class NonmfState:
    centroids: list
    assignment: np.ndarray
    k: int

    @property
    def weights(self):
        return np.ones(len(self.centroids))

    def invariant_errors(self, atol=1e-8):
        errs = []
        for v, F in enumerate(self.centroids):
            if F.shape[0] >= self.k and np.linalg.norm(F.T @ F - np.eye(self.k)) > atol:
                errs.append(f"centroid matrix {v} columns are not orthonormal")
        a = self.assignment
        if a.size and (a.min() < 0 or a.max() >= self.k):
            errs.append("assignment entries outside [0, k)")
        return errs


def update_centroids(state, ds, stats=None, kernels=None):
    sums, counts = stats or cluster_stats(ds, state.assignment, state.k, kernels)
    out = []
    for F, Z in zip(state.centroids, sums):
        if F.shape[0] < state.k:
            Z = Z + F * (counts.max() - counts)
        out.append(fast_procrustes(Z, kernels))
    return replace(state, centroids=out)


def update_assignments(state, ds, repair=True, kernels=None):
    kern = kernels or get_kernels()
    S = np.zeros((ds.n, state.k))
    t = np.zeros(state.k)
    for v, F in enumerate(state.centroids):
        S += ds.sample_major(v) @ F
        t += np.einsum("ij,ij->j", F, F)

    def norms():
        return sum(kern.row_sq_norms(ds.sample_major(v)) for v in range(ds.m))

    labels, raw, moved = nearest_with_repair(S, t, norms, state.k, repair, kern)
    return replace(state, assignment=labels), raw, moved


def residuals(state, ds, kernels=None):
    kern = kernels or get_kernels()
    labels = np.ascontiguousarray(state.assignment, dtype=np.int64)
    return np.array([
        math.sqrt(float(np.sum(kern.residual_sq(ds.sample_major(v), np.ascontiguousarray(F), labels))))
        for v, F in enumerate(state.centroids)
    ])


def nonmf_solve(ds, cfg, kernels=None, stop_on_convergence=True):
    """
    Alternate ``F_v`` Procrustes steps and shared nearest-centroid steps.

    Uses the same initialization, tie-breaking, repair and stopping rules as
    :func:`aimc.solver.solve`, except that convergence is judged on the
    squared objective ``sum_v r_v^2``, the quantity this model minimizes.
    ``cfg.d`` is ignored.
    """
    cfg.validate(ds)
    kern = kernels or get_kernels()
    timings = {"F": 0.0, "Y": 0.0, "objective": 0.0}
    t0 = time.perf_counter()
    labels = _initial_labels(ds, cfg, kern)
    sums, _ = cluster_stats(ds, labels, cfg.k, kern)
    state = NonmfState([procrustes_max_trace(Z) for Z in sums], labels, cfg.k)
    timings["init"] = time.perf_counter() - t0

    r = residuals(state, ds, kern)
    prev = float(np.sum(r**2))
    trace, iter_times = [], []
    flags = {"rank_limited_views": [v for v, p in enumerate(ds.dims) if p < cfg.k],
             "repairs": 0, "repairs_reverted": 0}
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        t_iter = time.perf_counter()
        t = time.perf_counter()
        state = update_centroids(state, ds, cluster_stats(ds, state.assignment, cfg.k, kern), kern)
        timings["F"] += time.perf_counter() - t

        t = time.perf_counter()
        state, raw, moved = update_assignments(state, ds, cfg.repair_empty_clusters, kern)
        timings["Y"] += time.perf_counter() - t

        t = time.perf_counter()
        r = residuals(state, ds, kern)
        sq = float(np.sum(r**2))
        if moved:
            flags["repairs"] += len(moved)
            if sq > prev:
                flags["repairs_reverted"] += len(moved)
                state = replace(state, assignment=raw)
                r = residuals(state, ds, kern)
                sq = float(np.sum(r**2))
        if not math.isfinite(sq):
            raise NumericError(f"non-finite objective at iteration {it}")
        timings["objective"] += time.perf_counter() - t

        trace.append((it, float(sum(r.tolist())), sq))
        iter_times.append(time.perf_counter() - t_iter)
        change = abs(prev - sq) / max(prev, cfg.epsilon)
        prev = sq
        if stop_on_convergence and change < cfg.tol:
            converged = True
            break
    timings["total"] = time.perf_counter() - t0
    return SolveResult(
        state=state,
        objective_trace=trace,
        per_view_residuals=r,
        converged=converged,
        iters_run=it,
        timings=timings,
        method="nonmf",
        iteration_times=iter_times,
        flags=flags,
    )

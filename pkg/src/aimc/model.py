"""Shared data types: datasets, solver state, configuration and results."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

INIT_MODES = ("kmeans-concat", "random")
NORMALIZATIONS = ("none", "unit-l2-sample", "zscore-feature")


class ConfigError(ValueError):
    """Invalid solver configuration, or configuration infeasible for a dataset."""


@dataclass(frozen=True)
class MultiviewDataset:
    """
    ``m`` views of the same ``n`` samples.

    ``views[v]`` has shape ``(d_v, n)``: columns are samples. Views are stored
    Fortran-ordered so that ``views[v].T`` (sample-major) is C-contiguous,
    which is the layout the kernels consume.
    """

    views: list
    view_names: list = None
    labels: Optional[np.ndarray] = None
    declared_k: Optional[int] = None
    name: str = "dataset"

    def __post_init__(self):
        views = [np.asfortranarray(np.asarray(X, dtype=np.float64)) for X in self.views]
        for v, X in enumerate(views):
            if X.ndim != 2:
                raise ValueError(f"view {v} must be 2-D, got shape {X.shape}")
        object.__setattr__(self, "views", views)
        names = self.view_names
        if names is None:
            names = [f"view{v}" for v in range(len(views))]
        object.__setattr__(self, "view_names", list(names))
        if self.labels is not None:
            object.__setattr__(self, "labels", np.asarray(self.labels).ravel())

    @property
    def m(self):
        return len(self.views)

    @property
    def n(self):
        return self.views[0].shape[1] if self.views else 0

    @property
    def dims(self):
        return tuple(X.shape[0] for X in self.views)

    @property
    def h(self):
        """Total feature dimension over all views."""
        return sum(self.dims)

    def sample_major(self, v):
        """View ``v`` as an ``(n, d_v)`` C-contiguous array (no copy)."""
        return np.ascontiguousarray(self.views[v].T)


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.errors

    def __str__(self):
        lines = [f"error: {e}" for e in self.errors]
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines) if lines else "ok"


def validate_dataset(ds, k=None, d=None):
    """
    Check a dataset for problems; never raises.

    Errors: no views, sample-count mismatches, ``n < 2``, non-finite entries
    (first offending ``(view, row, col)`` per view), label length mismatch.
    Warnings: constant features, and views narrower than ``k`` or ``d``.
    """
    report = ValidationReport()
    if ds.m < 1:
        report.errors.append("dataset has no views")
        return report
    ns = [X.shape[1] for X in ds.views]
    if len(set(ns)) > 1:
        detail = ", ".join(f"{name}: n={c}" for name, c in zip(ds.view_names, ns))
        report.errors.append(f"sample-count mismatch across views ({detail})")
    elif ns[0] < 2:
        report.errors.append(f"need at least 2 samples, got {ns[0]}")
    k = k if k is not None else ds.declared_k
    for v, (name, X) in enumerate(zip(ds.view_names, ds.views)):
        finite = np.isfinite(X)
        if not finite.all():
            row, col = np.argwhere(~finite)[0]
            report.errors.append(
                f"view {v} ({name}) has {int((~finite).sum())} non-finite entries, "
                f"first at (view={v}, row={row}, col={col})"
            )
            continue
        if X.shape[1] > 1:
            const = np.flatnonzero(X.max(axis=1) == X.min(axis=1))
            if const.size:
                report.warnings.append(
                    f"view {v} ({name}) has {const.size} constant features (rows {const[:5].tolist()}...)"
                )
        if k is not None and X.shape[0] < k:
            report.warnings.append(f"view {v} ({name}): d_v={X.shape[0]} < k={k}")
        if d is not None and X.shape[0] < d:
            report.warnings.append(f"view {v} ({name}): d_v={X.shape[0]} < d={d}")
    if ds.labels is not None and len(set(ns)) == 1 and ds.labels.shape[0] != ns[0]:
        report.errors.append(f"labels have length {ds.labels.shape[0]}, expected n={ns[0]}")
    return report


def normalize_dataset(ds, mode):
    """Return a copy of ``ds`` with every view normalized by ``mode``."""
    if mode == "none":
        return ds
    if mode not in NORMALIZATIONS:
        raise ConfigError(f"unknown normalization {mode!r}")
    views = []
    for X in ds.views:
        if mode == "unit-l2-sample":
            norms = np.linalg.norm(X, axis=0)
            norms[norms == 0] = 1.0
            views.append(X / norms)
        else:
            mu = X.mean(axis=1, keepdims=True)
            sd = X.std(axis=1, keepdims=True)
            sd[sd == 0] = 1.0
            views.append((X - mu) / sd)
    return MultiviewDataset(views, ds.view_names, ds.labels, ds.declared_k, ds.name)


@dataclass(frozen=True)
class SolverConfig:
    d: int
    k: int
    max_iters: int = 100
    tol: float = 1e-6
    seed: int = 0
    init_mode: str = "kmeans-concat"
    epsilon: float = 1e-12
    normalization: str = "none"
    repair_empty_clusters: bool = True

    def validate(self, ds=None):
        if self.k < 1:
            raise ConfigError(f"k must be positive, got {self.k}")
        if self.d < self.k:
            raise ConfigError(f"d={self.d} < k={self.k}; the latent dimension must satisfy d >= k")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.init_mode not in INIT_MODES:
            raise ConfigError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        if ds is not None and self.k > ds.n:
            raise ConfigError(f"k={self.k} clusters is infeasible for n={ds.n} samples")
        return self

    def to_dict(self):
        return {
            "d": self.d,
            "k": self.k,
            "max_iters": self.max_iters,
            "tol": self.tol,
            "seed": self.seed,
            "init_mode": self.init_mode,
            "epsilon": self.epsilon,
            "normalization": self.normalization,
            "repair_empty_clusters": self.repair_empty_clusters,
        }


@dataclass(frozen=True)
class ModelState:
    """
    Iterate of the AIMC solver.

    ``assignment`` is the label-vector form of the indicator matrix ``Y``:
    sample ``j`` belongs to cluster ``assignment[j]``.
    """

    generators: list
    centroids: np.ndarray
    assignment: np.ndarray
    weights: np.ndarray
    d: int
    k: int

    def invariant_errors(self, atol=1e-8):
        errs = []
        F = self.centroids
        if F.shape != (self.d, self.k):
            errs.append(f"centroids have shape {F.shape}, expected {(self.d, self.k)}")
        elif np.linalg.norm(F.T @ F - np.eye(self.k)) > atol:
            errs.append("centroid columns are not orthonormal")
        for v, G in enumerate(self.generators):
            if G.shape[1] != self.d:
                errs.append(f"generator {v} has {G.shape[1]} columns, expected d={self.d}")
            elif G.shape[0] >= self.d and np.linalg.norm(G.T @ G - np.eye(self.d)) > atol:
                errs.append(f"generator {v} columns are not orthonormal")
        a = self.assignment
        if a.size and (a.min() < 0 or a.max() >= self.k):
            errs.append("assignment entries outside [0, k)")
        if not np.all(self.weights > 0):
            errs.append("weights must be strictly positive")
        return errs


@dataclass
class Objective:
    unsquared: float
    weighted_squared: float
    per_view: np.ndarray


@dataclass
class SolveResult:
    state: object
    objective_trace: list
    per_view_residuals: np.ndarray
    converged: bool
    iters_run: int
    timings: dict
    method: str = "aimc"
    iteration_times: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)

    @property
    def labels(self):
        return self.state.assignment

    @property
    def weights(self):
        return self.state.weights

    @property
    def final_objective(self):
        return self.objective_trace[-1][1] if self.objective_trace else float("nan")

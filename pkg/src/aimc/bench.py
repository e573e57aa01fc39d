"""
Per-iteration scaling benchmark on planted data.

For each sample count a planted dataset is generated with fixed views,
``k`` and ``d``, the solver runs a fixed number of iterations with the
convergence stop disabled, and per-iteration wall times are recorded. A
least-squares fit of ``log(time)`` against ``log(n)`` estimates the
empirical exponent. Each kernel backend (numba, numpy) can be timed on the
same data for comparison.
"""

import numpy as np

from ._kernels import get_kernels
from .io import SyntheticSpec, gen_synthetic
from .model import SolverConfig
from .nonmf import nonmf_solve
from .solver import solve

DEFAULT_NS = (1000, 2000, 4000, 8000, 16000)


def _warm_up(kernels, m, k, d, dims):
    ds, _ = gen_synthetic(SyntheticSpec(n=max(4 * k, 64), m=m, k=k, d=d, view_dims=list(dims), seed=0))
    solve(ds, SolverConfig(d=d, k=k, max_iters=2), kernels=kernels, stop_on_convergence=False)


def run_scaling(ns=DEFAULT_NS, iters=10, m=3, k=10, d=15, dims=(100, 80, 60),
                noise_sigma=0.01, seed=0, backend=None, method="aimc"):
    """
    Time ``iters`` solver iterations at every ``n`` in ``ns``.

    Returns a list of row dicts ``{backend, n, iter, seconds}``.
    """
    kern = get_kernels(backend)
    _warm_up(kern, m, k, d, dims)
    run = solve if method == "aimc" else nonmf_solve
    rows = []
    for n in ns:
        ds, _ = gen_synthetic(SyntheticSpec(n=n, m=m, k=k, d=d, view_dims=list(dims),
                                            noise_sigma=noise_sigma, seed=seed))
        cfg = SolverConfig(d=d, k=k, max_iters=iters, seed=seed)
        res = run(ds, cfg, kernels=kern, stop_on_convergence=False)
        for i, sec in enumerate(res.iteration_times, start=1):
            rows.append({"backend": kern.name, "n": int(n), "iter": i, "seconds": float(sec)})
    return rows


def per_n_times(rows):
    """Median per-iteration seconds for each ``n`` (sorted by ``n``)."""
    ns = sorted({r["n"] for r in rows})
    return ns, [float(np.median([r["seconds"] for r in rows if r["n"] == n])) for n in ns]


def loglog_slope(ns, times):
    """Least-squares slope of ``log(times)`` versus ``log(ns)``."""
    slope, _ = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(times, float)), 1)
    return float(slope)


def summarize(rows):
    out = {}
    for name in sorted({r["backend"] for r in rows}):
        sub = [r for r in rows if r["backend"] == name]
        ns, times = per_n_times(sub)
        ratios = [b / a for a, b in zip(times, times[1:])]
        out[name] = {
            "n": ns,
            "median_iter_seconds": times,
            "doubling_ratios": ratios,
            "loglog_slope": loglog_slope(ns, times),
        }
    return out


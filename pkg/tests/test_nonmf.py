import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from aimc.metrics import evaluate
from aimc.model import MultiviewDataset, SolverConfig
from aimc.nonmf import NonmfState, nonmf_solve, residuals, update_assignments, update_centroids
from aimc.solver import solve

from helpers import planted


def planted_nonmf(rng, n, dims, k):
    labels = rng.integers(0, k, size=n)
    labels[:k] = np.arange(k)
    Fs = [np.linalg.qr(rng.standard_normal((p, k)))[0] for p in dims]
    return MultiviewDataset([F[:, labels] for F in Fs], labels=labels), Fs


def test_planted_recovery(rng):
    ds, _ = planted_nonmf(rng, 300, [20, 15, 12], 4)
    res = nonmf_solve(ds, SolverConfig(d=4, k=4))
    assert res.final_objective < 1e-8
    assert evaluate(res.labels, ds.labels).acc == 1.0


def test_single_view_matches_nearest_centroid_oracle(rng):
    X = rng.standard_normal((6, 40))
    ds = MultiviewDataset([X])
    F = np.linalg.qr(rng.standard_normal((6, 3)))[0]
    state = NonmfState([F], np.zeros(40, np.int64), 3)
    new, raw, _ = update_assignments(state, ds, repair=False)
    dist = ((X[:, :, None] - F[:, None, :]) ** 2).sum(axis=0)
    np.testing.assert_array_equal(raw, dist.argmin(axis=1))
    np.testing.assert_array_equal(new.assignment, raw)


def test_centroid_step_orthonormal(rng):
    ds = MultiviewDataset([rng.standard_normal((8, 50)), rng.standard_normal((2, 50))])
    labels = rng.integers(0, 3, size=50)
    state = NonmfState([np.linalg.qr(rng.standard_normal((8, 3)))[0], np.eye(2, 3)], labels, 3)
    new = update_centroids(state, ds)
    assert new.invariant_errors() == []
    # wide view: orthonormal rows
    np.testing.assert_allclose(new.centroids[1] @ new.centroids[1].T, np.eye(2), atol=1e-10)
    assert np.sum(residuals(new, ds) ** 2) <= np.sum(residuals(state, ds) ** 2) + 1e-9


@given(seed=st.integers(0, 2**31), n=st.integers(10, 120), m=st.integers(1, 4), k=st.integers(2, 6))
def test_squared_objective_monotone(seed, n, m, k):
    rng = np.random.default_rng(seed)
    ds = MultiviewDataset([rng.standard_normal((int(p), n)) for p in rng.integers(1, 15, size=m)])
    res = nonmf_solve(ds, SolverConfig(d=k, k=k, max_iters=30, seed=seed % 100))
    sq = [w for _, _, w in res.objective_trace]
    assert all(b <= a + 1e-9 for a, b in zip(sq, sq[1:]))
    assert res.state.invariant_errors() == []


def test_planted_aimc_data():
    ds, truth = planted(n=500, sigma=0.01)
    res = nonmf_solve(ds, SolverConfig(d=8, k=5))
    assert evaluate(res.labels, truth.assignment).acc >= 0.99


def test_agrees_with_aimc_on_noiseless_single_view():
    ds, _ = planted(n=200, m=1, k=4, d=4, dims=(12,), sigma=0.0)
    cfg = SolverConfig(d=4, k=4)
    assert solve(ds, cfg).final_objective < 1e-8
    assert nonmf_solve(ds, cfg).final_objective < 1e-8


def test_deterministic(rng):
    ds = MultiviewDataset([rng.standard_normal((5, 80)), rng.standard_normal((9, 80))])
    cfg = SolverConfig(d=3, k=3, seed=1)
    a, b = nonmf_solve(ds, cfg), nonmf_solve(ds, cfg)
    assert a.objective_trace == b.objective_trace
    assert a.method == "nonmf" and np.all(a.weights == 1.0)

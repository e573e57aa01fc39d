import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aimc.linalg import NumericError, orthonormal_columns, procrustes_max_trace, thin_svd


def random_orthonormal(rng, p, q):
    Q, _ = np.linalg.qr(rng.standard_normal((p, q)))
    return Q


def test_svd_identity():
    U, S, V = thin_svd(np.eye(3))
    np.testing.assert_allclose(S, [1, 1, 1])
    np.testing.assert_allclose(U @ V.T, np.eye(3), atol=1e-14)


def test_svd_diagonal():
    _, S, _ = thin_svd(np.diag([3.0, 2.0]))
    np.testing.assert_allclose(S, [3, 2])


@pytest.mark.parametrize("shape", [(5, 3), (3, 5), (1, 1), (1, 7), (200, 200), (120, 40)])
def test_svd_round_trip(rng, shape):
    A = rng.standard_normal(shape)
    U, S, V = thin_svd(A)
    r = min(shape)
    assert U.shape == (shape[0], r) and V.shape == (shape[1], r)
    assert np.linalg.norm(A - (U * S) @ V.T) <= 1e-10 * max(1.0, np.linalg.norm(A))
    assert np.all(S >= 0) and np.all(np.diff(S) <= 0)
    assert np.linalg.norm(U.T @ U - np.eye(r)) < 1e-10
    assert np.linalg.norm(V.T @ V - np.eye(r)) < 1e-10


@given(p=st.integers(1, 30), q=st.integers(1, 30), seed=st.integers(0, 2**31))
def test_svd_round_trip_property(p, q, seed):
    A = np.random.default_rng(seed).standard_normal((p, q)) * 10.0 ** (seed % 7 - 3)
    U, S, V = thin_svd(A)
    assert np.linalg.norm(A - (U * S) @ V.T) <= 1e-10 * max(1.0, np.linalg.norm(A))


def test_svd_sign_convention(rng):
    A = rng.standard_normal((8, 4))
    U, _, V = thin_svd(A)
    U2, _, V2 = thin_svd(-A)
    for c in range(U.shape[1]):
        assert U[np.argmax(np.abs(U[:, c])), c] > 0
    # -A flips exactly one side of each pair
    np.testing.assert_allclose(U2, U, atol=1e-12)
    np.testing.assert_allclose(V2, -V, atol=1e-12)


def test_svd_rejects_non_finite():
    with pytest.raises(NumericError, match=r"\(2, 2\)"):
        thin_svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_svd_non_convergence_names_shape(monkeypatch):
    def boom(*a, **k):
        raise np.linalg.LinAlgError("SVD did not converge")

    monkeypatch.setattr(np.linalg, "svd", boom)
    with pytest.raises(NumericError, match=r"\(4, 3\)"):
        thin_svd(np.ones((4, 3)))


def test_procrustes_identity():
    G = procrustes_max_trace(np.eye(2))
    np.testing.assert_allclose(G, np.eye(2), atol=1e-14)
    assert np.trace(G.T @ np.eye(2)) == pytest.approx(2.0)


def test_procrustes_rotation_is_own_maximizer():
    H = np.array([[0.0, -1.0], [1.0, 0.0]])
    G = procrustes_max_trace(H)
    np.testing.assert_allclose(G, H, atol=1e-14)
    assert np.trace(G.T @ H) == pytest.approx(2.0)


def test_procrustes_beats_random_orthonormal(rng):
    H = rng.standard_normal((4, 3))
    G = procrustes_max_trace(H)
    best = np.trace(G.T @ H)
    assert abs(best - np.linalg.svd(H, compute_uv=False).sum()) < 1e-8
    for _ in range(100):
        Q = random_orthonormal(rng, 4, 3)
        assert best - np.trace(Q.T @ H) >= -1e-8


@given(p=st.integers(1, 12), q=st.integers(1, 12), seed=st.integers(0, 2**31))
def test_procrustes_nuclear_norm_and_optimality(p, q, seed):
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((p, q))
    G = procrustes_max_trace(H)
    best = np.trace(G.T @ H)
    assert abs(best - np.linalg.svd(H, compute_uv=False).sum()) < 1e-8
    if p >= q:
        assert np.linalg.norm(G.T @ G - np.eye(q)) < 1e-10
        Q = random_orthonormal(rng, p, q)
    else:
        # wide target: maximizer has orthonormal rows
        assert np.linalg.norm(G @ G.T - np.eye(p)) < 1e-10
        Q = random_orthonormal(rng, q, p).T
    assert best - np.trace(Q.T @ H) >= -1e-8


def test_orthonormal_columns_keeps_span(rng):
    A = random_orthonormal(rng, 6, 3)
    Q, fallback = orthonormal_columns(A)
    assert not fallback
    # same column space: projector onto span(A) fixes Q
    np.testing.assert_allclose(A @ (A.T @ Q), Q, atol=1e-12)


def test_orthonormal_columns_random(rng):
    Q, _ = orthonormal_columns(rng.standard_normal((6, 2)))
    assert np.linalg.norm(Q.T @ Q - np.eye(2)) < 1e-10


def test_orthonormal_columns_zero_falls_back_deterministically():
    Q1, f1 = orthonormal_columns(np.zeros((5, 2)), seed=3)
    Q2, f2 = orthonormal_columns(np.zeros((5, 2)), seed=3)
    assert f1 and f2
    np.testing.assert_array_equal(Q1, Q2)
    assert np.linalg.norm(Q1.T @ Q1 - np.eye(2)) < 1e-10
    Q3, _ = orthonormal_columns(shape=(5, 2), seed=3)
    np.testing.assert_array_equal(Q1, Q3)


def test_orthonormal_columns_too_many_columns():
    with pytest.raises(ValueError, match="3 columns"):
        orthonormal_columns(np.ones((2, 3)))

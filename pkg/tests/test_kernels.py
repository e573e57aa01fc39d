import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aimc import _kernels
from aimc._kernels import get_kernels, numpy_kernels

numba_kernels = pytest.importorskip("numba") and _kernels.numba_kernels


@given(n=st.integers(1, 200), p=st.integers(1, 20), k=st.integers(1, 8), seed=st.integers(0, 2**31))
def test_backends_agree(n, p, k, seed):
    rng = np.random.default_rng(seed)
    XT = rng.standard_normal((n, p))
    labels = rng.integers(0, k, size=n).astype(np.int64)
    C = rng.standard_normal((p, k))

    Z1, c1 = numpy_kernels.cluster_sums(XT, labels, k)
    Z2, c2 = numba_kernels.cluster_sums(XT, labels, k)
    np.testing.assert_array_equal(c1, c2)
    np.testing.assert_allclose(Z1, Z2, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(Z1, np.stack([XT[labels == i].sum(axis=0) for i in range(k)], axis=1), atol=1e-12)

    np.testing.assert_allclose(numpy_kernels.residual_sq(XT, C, labels),
                               numba_kernels.residual_sq(XT, C, labels), rtol=1e-12)
    np.testing.assert_allclose(numpy_kernels.row_sq_norms(XT), numba_kernels.row_sq_norms(XT), rtol=1e-12)

    S = XT @ C
    t = np.einsum("ij,ij->j", C, C)
    l1, b1 = numpy_kernels.nearest(S, t)
    l2, b2 = numba_kernels.nearest(S, t)
    np.testing.assert_array_equal(l1, l2)
    np.testing.assert_array_equal(b1, b2)


def test_nearest_ties_go_to_smallest_index():
    S = np.array([[1.0, 1.0, 1.0], [0.0, 2.0, 2.0]])
    t = np.zeros(3)
    for kern in (numpy_kernels, numba_kernels):
        labels, _ = kern.nearest(S, t)
        assert labels.tolist() == [0, 1]


@given(p=st.integers(1, 30), q=st.integers(1, 15), rank=st.integers(0, 15), seed=st.integers(0, 2**31))
def test_fast_procrustes_matches_svd_route(p, q, rank, seed):
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((p, q))
    if rank < min(p, q):
        H = rng.standard_normal((p, rank)) @ rng.standard_normal((rank, q))
    nuclear = np.linalg.svd(H, compute_uv=False).sum()
    for kern in (numpy_kernels, numba_kernels):
        G = kern.procrustes(H)
        assert abs(np.trace(G.T @ H) - nuclear) < 1e-8 * max(1.0, nuclear)
        if p >= q:
            assert np.linalg.norm(G.T @ G - np.eye(q)) < 1e-10
        if rank >= min(p, q):
            # full rank: the maximizer is unique, both routes must agree
            U, _, Vt = np.linalg.svd(H, full_matrices=False)
            np.testing.assert_allclose(G, U @ Vt, atol=1e-9)


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv("AIMC_DISABLE_NUMBA", "1")
    assert _kernels.backend() == "numpy"
    assert get_kernels() is numpy_kernels
    monkeypatch.setenv("AIMC_DISABLE_NUMBA", "0")
    assert _kernels.backend() == "numba"


def test_unknown_backend():
    with pytest.raises(ValueError):
        get_kernels("cuda")

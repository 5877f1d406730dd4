import numpy as np
import pytest

from gnbench import backend
from gnbench.errors import ParameterError
from gnbench.graph import WsParams, watts_strogatz
from gnbench.models import normalize_adjacency


def random_csr(rng, n_rows, n_cols, density=0.2):
    mask = rng.random((n_rows, n_cols)) < density
    values_dense = np.where(mask, rng.standard_normal((n_rows, n_cols)), 0.0)
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    indices = []
    values = []
    for i in range(n_rows):
        cols = np.flatnonzero(mask[i])
        indices.extend(cols.tolist())
        values.extend(values_dense[i, cols].tolist())
        indptr[i + 1] = len(indices)
    return (indptr, np.asarray(indices, dtype=np.int64),
            np.asarray(values, dtype=np.float64), values_dense)


@pytest.mark.parametrize("seed", range(5))
def test_spmm_variants_match_dense_product(seed):
    rng = np.random.default_rng(seed)
    indptr, indices, values, dense_a = random_csr(rng, 17, 17, density=0.25)
    x = rng.standard_normal((17, 6))
    expected = dense_a @ x
    got_numpy = backend.spmm_numpy(indptr, indices, values, x)
    got_numba = backend.spmm_numba(indptr, indices, values, x)
    np.testing.assert_allclose(got_numpy, expected, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(got_numba, expected, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(got_numba, got_numpy, rtol=1e-13, atol=1e-14)


def test_spmm_handles_empty_rows():
    indptr = np.array([0, 0, 2, 2, 3], dtype=np.int64)
    indices = np.array([0, 3, 1], dtype=np.int64)
    values = np.array([2.0, -1.0, 0.5])
    x = np.arange(8, dtype=np.float64).reshape(4, 2)
    expected = np.array([[0.0, 0.0], [2 * 0 - 6, 2 * 1 - 7], [0.0, 0.0], [1.0, 1.5]])
    np.testing.assert_allclose(backend.spmm_numpy(indptr, indices, values, x), expected)
    np.testing.assert_allclose(backend.spmm_numba(indptr, indices, values, x), expected)


def test_spmm_empty_matrix():
    indptr = np.zeros(4, dtype=np.int64)
    indices = np.zeros(0, dtype=np.int64)
    values = np.zeros(0, dtype=np.float64)
    x = np.ones((3, 2))
    assert backend.spmm_numpy(indptr, indices, values, x).sum() == 0.0
    assert backend.spmm_numba(indptr, indices, values, x).sum() == 0.0


def test_pair_dot_variants_agree():
    rng = np.random.default_rng(1)
    z = rng.standard_normal((20, 8))
    heads = rng.integers(0, 20, size=50).astype(np.int64)
    tails = rng.integers(0, 20, size=50).astype(np.int64)
    expected = np.array([z[u] @ z[v] for u, v in zip(heads, tails)])
    np.testing.assert_allclose(backend.pair_dot_numpy(z, heads, tails), expected, rtol=1e-12)
    np.testing.assert_allclose(backend.pair_dot_numba(z, heads, tails), expected, rtol=1e-12)


def test_pair_dot_grad_variants_agree():
    rng = np.random.default_rng(2)
    z = rng.standard_normal((15, 5))
    heads = rng.integers(0, 15, size=40).astype(np.int64)
    tails = rng.integers(0, 15, size=40).astype(np.int64)
    g = rng.standard_normal(40)
    expected = np.zeros_like(z)
    for e in range(40):
        expected[heads[e]] += g[e] * z[tails[e]]
        expected[tails[e]] += g[e] * z[heads[e]]
    np.testing.assert_allclose(backend.pair_dot_grad_numpy(z, heads, tails, g),
                               expected, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(backend.pair_dot_grad_numba(z, heads, tails, g),
                               expected, rtol=1e-12, atol=1e-13)


def test_backends_agree_on_real_propagation_matrix():
    g = watts_strogatz(WsParams(n=300, k=4, beta=0.5, seed=3))
    adj = normalize_adjacency(g)
    rng = np.random.default_rng(0)
    x = rng.standard_normal((300, 32))
    a = backend.spmm_numba(adj.indptr, adj.indices, adj.values, x)
    b = backend.spmm_numpy(adj.indptr, adj.indices, adj.values, x)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-14)


def test_resolve_backend_env_and_explicit(monkeypatch):
    assert backend.resolve_backend("numpy") == "numpy"
    monkeypatch.setenv("GNB_BACKEND", "numpy")
    assert backend.resolve_backend() == "numpy"
    monkeypatch.delenv("GNB_BACKEND")
    assert backend.resolve_backend() in ("numba", "numpy")
    with pytest.raises(ParameterError):
        backend.resolve_backend("cuda")


def test_set_backend_switches_dispatch():
    original = backend.active_backend()
    try:
        backend.set_backend("numpy")
        assert backend.spmm is backend.spmm_numpy
        backend.set_backend("numba")
        assert backend.spmm is backend.spmm_numba
    finally:
        backend.set_backend(original)

"""Hot numeric kernels with numba-JIT and pure-numpy implementations.

Training spends nearly all of its time in three places: dense matmuls
(delegated to BLAS via ``@``, never reimplemented here), sparse
propagation of node states through the normalized adjacency (CSR times
dense), and the gather/scatter pair of the dot-product edge decoder.
The latter two are implemented twice:

* ``*_numba`` — sequential ``@njit`` loops, compiled once and cached;
* ``*_numpy`` — vectorized numpy equivalents used as a fallback.

Both variants accumulate in the same order, so results agree to the
last bit on the row/segment sizes this package produces.

Selection is per-process via the ``GNB_BACKEND`` environment variable
(``numba`` or ``numpy``); the default is ``numba`` when importable.
``benchmarks/bench_kernels.py`` times the two paths side by side.
"""

import os

import numpy as np

from .errors import ParameterError

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func

        return decorator


# ---------------------------------------------------------------------------
# CSR sparse-times-dense product (the GCN propagation step)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _spmm_kernel(indptr, indices, values, dense, out):
    n_rows = indptr.shape[0] - 1
    n_cols = dense.shape[1]
    for i in range(n_rows):
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            w = values[p]
            for k in range(n_cols):
                out[i, k] += w * dense[j, k]


def spmm_numba(indptr, indices, values, dense):
    out = np.zeros((indptr.shape[0] - 1, dense.shape[1]), dtype=np.float64)
    _spmm_kernel(indptr, indices, values, dense, out)
    return out


def spmm_numpy(indptr, indices, values, dense):
    """CSR @ dense via a segmented reduction.

    ``np.add.reduceat`` segments run from each listed start to the next
    one; listing only non-empty rows keeps empty rows at zero while the
    trailing empty-row offsets collapse into the preceding segment.
    """
    n_rows = indptr.shape[0] - 1
    out = np.zeros((n_rows, dense.shape[1]), dtype=np.float64)
    if indices.shape[0] == 0:
        return out
    products = values[:, None] * dense[indices]
    nonempty = np.flatnonzero(np.diff(indptr) > 0)
    out[nonempty] = np.add.reduceat(products, indptr[nonempty], axis=0)
    return out


# ---------------------------------------------------------------------------
# Edge decoder: per-pair dot products and their gradient scatter
# ---------------------------------------------------------------------------


@njit(cache=True)
def _pair_dot_kernel(z, heads, tails, out):
    dim = z.shape[1]
    for e in range(heads.shape[0]):
        u = heads[e]
        v = tails[e]
        acc = 0.0
        for k in range(dim):
            acc += z[u, k] * z[v, k]
        out[e] = acc


def pair_dot_numba(z, heads, tails):
    out = np.empty(heads.shape[0], dtype=np.float64)
    _pair_dot_kernel(z, heads, tails, out)
    return out


def pair_dot_numpy(z, heads, tails):
    return np.einsum("ij,ij->i", z[heads], z[tails])


@njit(cache=True)
def _pair_dot_grad_kernel(z, heads, tails, grad_out, grad_z):
    dim = z.shape[1]
    for e in range(heads.shape[0]):
        u = heads[e]
        v = tails[e]
        g = grad_out[e]
        for k in range(dim):
            grad_z[u, k] += g * z[v, k]
            grad_z[v, k] += g * z[u, k]


def pair_dot_grad_numba(z, heads, tails, grad_out):
    grad_z = np.zeros_like(z)
    _pair_dot_grad_kernel(z, heads, tails, grad_out, grad_z)
    return grad_z


def pair_dot_grad_numpy(z, heads, tails, grad_out):
    grad_z = np.zeros_like(z)
    np.add.at(grad_z, heads, grad_out[:, None] * z[tails])
    np.add.at(grad_z, tails, grad_out[:, None] * z[heads])
    return grad_z


# ---------------------------------------------------------------------------
# Backend selection
# ---------------------------------------------------------------------------

_IMPLS = {
    "numba": (spmm_numba, pair_dot_numba, pair_dot_grad_numba),
    "numpy": (spmm_numpy, pair_dot_numpy, pair_dot_grad_numpy),
}


def resolve_backend(name: str | None = None) -> str:
    """Pick the backend name from an explicit argument or ``GNB_BACKEND``."""
    if name is None:
        name = os.environ.get("GNB_BACKEND", "").strip().lower() or None
    if name is None:
        return "numba" if NUMBA_AVAILABLE else "numpy"
    if name not in _IMPLS:
        raise ParameterError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise ParameterError("backend 'numba' requested but numba is not installed")
    return name


_ACTIVE = resolve_backend()


def set_backend(name: str) -> None:
    """Switch the active kernel implementation (used by tests and benchmarks)."""
    global _ACTIVE, spmm, pair_dot, pair_dot_grad
    _ACTIVE = resolve_backend(name)
    spmm, pair_dot, pair_dot_grad = _IMPLS[_ACTIVE]


def active_backend() -> str:
    return _ACTIVE


spmm, pair_dot, pair_dot_grad = _IMPLS[_ACTIVE]

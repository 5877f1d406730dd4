"""Minimal reverse-mode autodiff over 2-D float64 arrays.

Every value is a matrix. Ops record their parents and a closure that
pushes the output gradient back; ``Tensor.backward`` runs the closures
in reverse topological order. Sparse propagation and the pair decoder
route through :mod:`gnbench.backend` so they share the numba/numpy
kernel selection.
"""

from __future__ import annotations

import numpy as np

from . import backend
from .errors import ParameterError, ShapeError, StateError


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, parents=(), backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ShapeError(f"tensors are 2-D; got shape {self.data.shape}")
        self.grad = None
        self._parents = tuple(parents)
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"

    def backward(self) -> None:
        """Accumulate gradients of this scalar into every upstream tensor."""
        if self.shape != (1, 1):
            raise ShapeError(f"backward needs a 1x1 tensor, got {self.shape}")
        if self._backward is None and not self._parents:
            raise StateError("backward called before any forward graph was recorded")
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))
        self.grad = np.ones((1, 1))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def _accumulate(self, g) -> None:
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: {a.shape} @ {b.shape}")
    out = Tensor(a.data @ b.data, parents=(a, b))

    def _back(g):
        a._accumulate(g @ b.data.T)
        b._accumulate(a.data.T @ g)

    out._backward = _back
    return out


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    if b.shape != (1, x.shape[1]):
        raise ShapeError(f"bias shape {b.shape} does not broadcast over {x.shape}")
    out = Tensor(x.data + b.data, parents=(x, b))

    def _back(g):
        x._accumulate(g)
        b._accumulate(g.sum(axis=0, keepdims=True))

    out._backward = _back
    return out


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    out = Tensor(np.where(mask, x.data, 0.0), parents=(x,))

    def _back(g):
        x._accumulate(g * mask)

    out._backward = _back
    return out


def dropout(x: Tensor, p: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; draws one mask per call from the supplied generator."""
    if not 0.0 <= p < 1.0:
        raise ParameterError(f"dropout probability must lie in [0, 1), got {p}")
    if p == 0.0:
        return x
    mask = (rng.random(x.shape) >= p) / (1.0 - p)
    out = Tensor(x.data * mask, parents=(x,))

    def _back(g):
        x._accumulate(g * mask)

    out._backward = _back
    return out


def spmm(adj, x: Tensor) -> Tensor:
    """Normalized-adjacency times dense; the matrix is symmetric so the
    gradient propagates through the same kernel."""
    if adj.num_nodes != x.shape[0]:
        raise ShapeError(f"adjacency is {adj.num_nodes} rows, input is {x.shape[0]}")
    out = Tensor(backend.spmm(adj.indptr, adj.indices, adj.values, x.data), parents=(x,))

    def _back(g):
        x._accumulate(backend.spmm(adj.indptr, adj.indices, adj.values, g))

    out._backward = _back
    return out


def pair_dot(z: Tensor, pairs: np.ndarray) -> Tensor:
    """Dot-product scores for node pairs: out[e] = <z[u_e], z[v_e]>."""
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ShapeError("pairs must be an (m, 2) index array")
    if pairs.size and (pairs.min() < 0 or pairs.max() >= z.shape[0]):
        raise ParameterError("pair index out of range")
    heads = np.ascontiguousarray(pairs[:, 0])
    tails = np.ascontiguousarray(pairs[:, 1])
    scores = backend.pair_dot(z.data, heads, tails)
    out = Tensor(scores[:, None], parents=(z,))

    def _back(g):
        z._accumulate(backend.pair_dot_grad(z.data, heads, tails,
                                            np.ascontiguousarray(g[:, 0])))

    out._backward = _back
    return out


def take_rows(x: Tensor, ids: np.ndarray) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= x.shape[0]):
        raise ParameterError("row index out of range")
    out = Tensor(x.data[ids], parents=(x,))

    def _back(g):
        acc = np.zeros_like(x.data)
        np.add.at(acc, ids, g)
        x._accumulate(acc)

    out._backward = _back
    return out


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    expx = np.exp(x[~pos])
    out[~pos] = expx / (1.0 + expx)
    return out


def bce_with_logits(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean binary cross-entropy in the softplus form, stable for huge logits."""
    labels = np.asarray(labels, dtype=np.float64).reshape(-1)
    if logits.shape != (labels.shape[0], 1):
        raise ShapeError(f"logits {logits.shape} vs {labels.shape[0]} labels")
    if labels.size and not np.all((labels == 0) | (labels == 1)):
        raise ParameterError("labels must be 0 or 1")
    x = logits.data[:, 0]
    per = np.maximum(x, 0.0) - x * labels + np.log1p(np.exp(-np.abs(x)))
    out = Tensor([[per.mean()]], parents=(logits,))

    def _back(g):
        grad = (_sigmoid(x) - labels) / labels.shape[0]
        logits._accumulate(g[0, 0] * grad[:, None])

    out._backward = _back
    return out


def softmax_cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean cross-entropy against integer class labels (log-sum-exp form)."""
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    n, c = logits.shape
    if labels.shape[0] != n:
        raise ShapeError(f"{n} logit rows vs {labels.shape[0]} labels")
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise ParameterError(f"label out of range for {c} classes")
    x = logits.data
    xmax = x.max(axis=1, keepdims=True)
    lse = xmax[:, 0] + np.log(np.exp(x - xmax).sum(axis=1))
    out = Tensor([[(lse - x[np.arange(n), labels]).mean()]], parents=(logits,))

    def _back(g):
        soft = np.exp(x - xmax)
        soft /= soft.sum(axis=1, keepdims=True)
        soft[np.arange(n), labels] -= 1.0
        logits._accumulate(g[0, 0] * soft / n)

    out._backward = _back
    return out

"""Reference models (feature-only MLP, graph convolution), optimizer, checkpoints."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff, data
from .autodiff import Tensor
from .errors import ParameterError, ShapeError
from .graph import Graph


@dataclass(frozen=True)
class MlpConfig:
    in_dim: int
    hidden_dims: tuple
    out_dim: int
    dropout: float = 0.0
    activation: str = "relu"
    weight_init: str = "glorot_uniform"
    bias: bool = True

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1 or any(h < 1 for h in self.hidden_dims):
            raise ParameterError("layer dimensions must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ParameterError("dropout must lie in [0, 1)")
        if self.activation != "relu":
            raise ParameterError(f"unsupported activation {self.activation!r}")
        if self.weight_init != "glorot_uniform":
            raise ParameterError(f"unsupported init {self.weight_init!r}")


@dataclass(frozen=True)
class GcnConfig:
    in_dim: int
    hidden_dim: int
    out_dim: int
    num_layers: int = 2
    dropout: float = 0.0
    self_loops: bool = True

    def __post_init__(self):
        if self.in_dim < 1 or self.hidden_dim < 1 or self.out_dim < 1:
            raise ParameterError("layer dimensions must be >= 1")
        if self.num_layers < 1:
            raise ParameterError("num_layers must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ParameterError("dropout must lie in [0, 1)")

    def layer_dims(self):
        dims = [self.in_dim] + [self.hidden_dim] * (self.num_layers - 1) + [self.out_dim]
        return list(zip(dims[:-1], dims[1:]))


@dataclass(frozen=True)
class NormAdj:
    """Symmetric-normalized adjacency in CSR: value(u,v) = 1/sqrt(deg~(u) deg~(v))."""

    num_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray


def normalize_adjacency(graph: Graph, self_loops: bool = True) -> NormAdj:
    """Build the propagation matrix D~^{-1/2} (A + I) D~^{-1/2} (I optional)."""
    n = graph.num_nodes
    deg = graph.degrees().astype(np.float64)
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(graph.indptr))
    dst = graph.indices.astype(np.int64)
    if self_loops:
        src = np.concatenate([src, np.arange(n, dtype=np.int64)])
        dst = np.concatenate([dst, np.arange(n, dtype=np.int64)])
        deg = deg + 1.0
    inv_sqrt = np.zeros(n, dtype=np.float64)
    nonzero = deg > 0
    inv_sqrt[nonzero] = 1.0 / np.sqrt(deg[nonzero])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    values = inv_sqrt[src] * inv_sqrt[dst]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    for arr in (indptr, dst, values):
        arr.setflags(write=False)
    return NormAdj(num_nodes=n, indptr=indptr, indices=dst, values=values)


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def init_mlp(cfg: MlpConfig, seed: int) -> list:
    """Parameter list [W0, b0, W1, b1, ...]; weights Glorot-uniform, biases zero."""
    rng = np.random.default_rng(seed)
    params = []
    dims = [cfg.in_dim] + list(cfg.hidden_dims) + [cfg.out_dim]
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        params.append(Tensor(_glorot(rng, fan_in, fan_out)))
        if cfg.bias:
            params.append(Tensor(np.zeros((1, fan_out))))
    return params


def init_gcn(cfg: GcnConfig, seed: int) -> list:
    rng = np.random.default_rng(seed)
    params = []
    for fan_in, fan_out in cfg.layer_dims():
        params.append(Tensor(_glorot(rng, fan_in, fan_out)))
        params.append(Tensor(np.zeros((1, fan_out))))
    return params


def mlp_forward(cfg: MlpConfig, params: list, x: Tensor, train_mode: bool = False,
                rng: np.random.Generator | None = None) -> Tensor:
    """Row-wise affine/ReLU/dropout stack; the graph never enters."""
    if x.shape[1] != cfg.in_dim:
        raise ShapeError(f"input has {x.shape[1]} columns, config expects {cfg.in_dim}")
    step = 2 if cfg.bias else 1
    n_layers = len(cfg.hidden_dims) + 1
    h = x
    for layer in range(n_layers):
        h = autodiff.matmul(h, params[layer * step])
        if cfg.bias:
            h = autodiff.add_bias(h, params[layer * step + 1])
        if layer < n_layers - 1:
            h = autodiff.relu(h)
            if train_mode and cfg.dropout > 0.0:
                h = autodiff.dropout(h, cfg.dropout, rng)
    return h


def gcn_forward(cfg: GcnConfig, params: list, adj: NormAdj, x: Tensor,
                train_mode: bool = False,
                rng: np.random.Generator | None = None) -> Tensor:
    """Stacked propagation layers: ReLU(A_hat H W); final layer linear."""
    if x.shape[1] != cfg.in_dim:
        raise ShapeError(f"input has {x.shape[1]} columns, config expects {cfg.in_dim}")
    if adj.num_nodes != x.shape[0]:
        raise ShapeError(f"adjacency has {adj.num_nodes} nodes, input {x.shape[0]} rows")
    h = x
    for layer in range(cfg.num_layers):
        h = autodiff.spmm(adj, h)
        h = autodiff.matmul(h, params[2 * layer])
        h = autodiff.add_bias(h, params[2 * layer + 1])
        if layer < cfg.num_layers - 1:
            h = autodiff.relu(h)
            if train_mode and cfg.dropout > 0.0:
                h = autodiff.dropout(h, cfg.dropout, rng)
    return h


def link_logits(z: Tensor, pairs: np.ndarray) -> Tensor:
    """Dot-product decoder; symmetric in the pair order."""
    return autodiff.pair_dot(z, pairs)


@dataclass
class AdamState:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params: list, lr: float, **kwargs) -> "AdamState":
        state = cls(lr=lr, **kwargs)
        state.m = [np.zeros_like(p.data) for p in params]
        state.v = [np.zeros_like(p.data) for p in params]
        return state


def adam_step(params: list, state: AdamState) -> None:
    """One bias-corrected Adam update in place; missing grads count as zero."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    for p, m, v in zip(params, state.m, state.v):
        g = p.grad if p.grad is not None else 0.0
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        p.data -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


def zero_grads(params: list) -> None:
    for p in params:
        p.grad = None


def clone_params(params: list) -> list:
    return [p.data.copy() for p in params]


def restore_params(params: list, snapshot: list) -> None:
    for p, saved in zip(params, snapshot):
        p.data = saved.copy()


def save_checkpoint(params: list, out_dir, extra: dict | None = None) -> None:
    """Write each parameter as a .gft tensor plus a key=value manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = {"num_params": len(params)}
    for i, p in enumerate(params):
        fname = f"param_{i:03d}.gft"
        arr = p.data if isinstance(p, Tensor) else np.asarray(p)
        data.write_gft(out_dir / fname, arr)
        lines[f"param_{i}"] = fname
    if extra:
        lines.update(extra)
    with open(out_dir / "manifest.txt", "w", newline="\n") as fh:
        for key, value in lines.items():
            fh.write(f"{key}={value}\n")


def load_checkpoint(in_dir) -> list:
    in_dir = Path(in_dir)
    manifest = data.read_key_value(in_dir / "manifest.txt")
    count = int(manifest["num_params"])
    return [data.read_gft(in_dir / manifest[f"param_{i}"]).astype(np.float64)
            for i in range(count)]

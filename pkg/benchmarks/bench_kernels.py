"""Benchmark the numba kernels against their pure-numpy fallbacks.

Times the two hot paths of training — CSR propagation and the pair
decoder's gather/scatter — at the sizes the shipped experiments use.

    python benchmarks/bench_kernels.py [--repeats 50]
"""

import argparse
import time

import numpy as np

from gnbench import backend
from gnbench.graph import WsParams, watts_strogatz
from gnbench.models import normalize_adjacency


def time_call(fn, repeats: int) -> float:
    fn()  # warm up (JIT compile / allocate)
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats * 1e3


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--nodes", type=int, default=1000)
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--pairs", type=int, default=3400)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    graph = watts_strogatz(WsParams(n=args.nodes, k=4, beta=0.5, seed=0))
    adj = normalize_adjacency(graph)
    dense = rng.standard_normal((args.nodes, args.dim))
    heads = rng.integers(0, args.nodes, size=args.pairs).astype(np.int64)
    tails = rng.integers(0, args.nodes, size=args.pairs).astype(np.int64)
    grad = rng.standard_normal(args.pairs)

    rows = [
        ("spmm (csr @ dense)",
         lambda: backend.spmm_numba(adj.indptr, adj.indices, adj.values, dense),
         lambda: backend.spmm_numpy(adj.indptr, adj.indices, adj.values, dense)),
        ("pair_dot (gather)",
         lambda: backend.pair_dot_numba(dense, heads, tails),
         lambda: backend.pair_dot_numpy(dense, heads, tails)),
        ("pair_dot_grad (scatter)",
         lambda: backend.pair_dot_grad_numba(dense, heads, tails, grad),
         lambda: backend.pair_dot_grad_numpy(dense, heads, tails, grad)),
    ]

    print(f"nodes={args.nodes} dim={args.dim} pairs={args.pairs} "
          f"nnz={adj.indices.shape[0]} repeats={args.repeats}")
    print(f"{'kernel':<26} {'numba (ms)':>12} {'numpy (ms)':>12} {'speedup':>9}")
    for name, numba_fn, numpy_fn in rows:
        t_numba = time_call(numba_fn, args.repeats) if backend.NUMBA_AVAILABLE else float("nan")
        t_numpy = time_call(numpy_fn, args.repeats)
        ratio = t_numpy / t_numba if t_numba == t_numba else float("nan")
        print(f"{name:<26} {t_numba:>12.3f} {t_numpy:>12.3f} {ratio:>8.1f}x")


if __name__ == "__main__":
    main()

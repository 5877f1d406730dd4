"""Undirected graphs in CSR form, small-world generation, and traversal."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph.

    ``edges`` holds each edge once as ``(u, v)`` with ``u < v``, sorted
    lexicographically. The CSR arrays store both directions with column
    indices sorted within each row, so neighbor iteration order is the
    ascending node id order every deterministic routine relies on.
    """

    num_nodes: int
    edges: np.ndarray          # (E, 2) int64, u < v, lexicographically sorted
    indptr: np.ndarray         # (num_nodes + 1,) int64
    indices: np.ndarray        # (2E,) int64

    @classmethod
    def from_edges(cls, num_nodes: int, edges) -> "Graph":
        """Build a graph from an iterable of (u, v) pairs.

        Pairs are canonicalized to u < v and sorted. Self-loops, duplicate
        edges, and out-of-range ids raise ParameterError.
        """
        if num_nodes < 0:
            raise ParameterError("num_nodes must be non-negative")
        edge_arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                              dtype=np.int64)
        if edge_arr.size == 0:
            edge_arr = edge_arr.reshape(0, 2)
        if edge_arr.ndim != 2 or edge_arr.shape[1] != 2:
            raise ParameterError("edges must be pairs of node ids")
        if edge_arr.size:
            if edge_arr.min() < 0 or edge_arr.max() >= num_nodes:
                raise ParameterError("edge endpoint out of range")
            if np.any(edge_arr[:, 0] == edge_arr[:, 1]):
                raise ParameterError("self-loops are not allowed")
        lo = np.minimum(edge_arr[:, 0], edge_arr[:, 1])
        hi = np.maximum(edge_arr[:, 0], edge_arr[:, 1])
        order = np.lexsort((hi, lo))
        canon = np.column_stack([lo[order], hi[order]])
        if canon.shape[0] > 1:
            dup = np.all(canon[1:] == canon[:-1], axis=1)
            if np.any(dup):
                raise ParameterError("duplicate edges are not allowed")
        indptr, indices = _build_csr(num_nodes, canon)
        for arr in (canon, indptr, indices):
            arr.setflags(write=False)
        return cls(num_nodes=num_nodes, edges=canon, indptr=indptr, indices=indices)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def neighbors(self, node: int) -> np.ndarray:
        return self.indices[self.indptr[node]:self.indptr[node + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        pos = np.searchsorted(row, v)
        return pos < row.shape[0] and row[pos] == v


def _build_csr(num_nodes: int, canon_edges: np.ndarray):
    src = np.concatenate([canon_edges[:, 0], canon_edges[:, 1]])
    dst = np.concatenate([canon_edges[:, 1], canon_edges[:, 0]])
    counts = np.bincount(src, minlength=num_nodes)
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    order = np.lexsort((dst, src))
    indices = dst[order]
    return indptr, indices


@dataclass(frozen=True)
class WsParams:
    """Ring-lattice rewiring parameters: n nodes, even mean degree k, rewiring beta."""

    n: int
    k: int
    beta: float
    seed: int

    def __post_init__(self):
        if self.k % 2 != 0:
            raise ParameterError("k must be even")
        if not 0 < self.k < self.n:
            raise ParameterError("k must satisfy 0 < k < n")
        if not 0.0 <= self.beta <= 1.0:
            raise ParameterError("beta must lie in [0, 1]")
        if self.seed < 0:
            raise ParameterError("seed must be non-negative")


def watts_strogatz(params: WsParams) -> Graph:
    """Sample a small-world graph by rewiring a ring lattice.

    Each node starts joined to its k/2 nearest neighbors per side. Lattice
    edges are visited in a fixed order (by node, then by offset) and the far
    endpoint is rewired with probability beta to a target drawn uniformly
    among nodes that create neither a self-loop nor a duplicate edge; if no
    such target exists the edge is kept. Edge count is exactly n*k/2 and the
    result is a pure function of the seed.
    """
    n, k = params.n, params.k
    rng = np.random.default_rng(params.seed)
    adj = [set() for _ in range(n)]
    for i in range(n):
        for off in range(1, k // 2 + 1):
            j = (i + off) % n
            adj[i].add(j)
            adj[j].add(i)
    coins = rng.random(n * (k // 2))
    edge_idx = 0
    for i in range(n):
        for off in range(1, k // 2 + 1):
            j = (i + off) % n
            if coins[edge_idx] < params.beta and len(adj[i]) < n - 1:
                while True:
                    t = int(rng.integers(n))
                    if t != i and t not in adj[i]:
                        break
                adj[i].discard(j)
                adj[j].discard(i)
                adj[i].add(t)
                adj[t].add(i)
            edge_idx += 1
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return Graph.from_edges(n, edges)


@dataclass(frozen=True)
class BfsTree:
    """Breadth-first tree from a root; distances use -1 for unreachable nodes."""

    root: int
    dist: np.ndarray           # (n,) int64, -1 when unreachable
    parent: np.ndarray         # (n,) int64, -1 for the root and unreachable nodes
    levels: list = field(default_factory=list)  # level i -> sorted array of nodes at distance i
    eccentricity: int = 0


def bfs(graph: Graph, root: int) -> BfsTree:
    """Level-synchronous BFS with deterministic tie-breaking.

    Nodes in each level are expanded in ascending id order, so the parent
    assigned to a newly discovered node is its smallest-id neighbor in the
    previous level.
    """
    if not 0 <= root < graph.num_nodes:
        raise ParameterError(f"root {root} out of range for {graph.num_nodes} nodes")
    n = graph.num_nodes
    dist = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    dist[root] = 0
    levels = [np.array([root], dtype=np.int64)]
    frontier = levels[0]
    depth = 0
    while True:
        nxt = []
        for u in frontier:
            for v in graph.neighbors(u):
                if dist[v] == -1:
                    dist[v] = depth + 1
                    parent[v] = u
                    nxt.append(v)
        if not nxt:
            break
        depth += 1
        frontier = np.array(sorted(nxt), dtype=np.int64)
        levels.append(frontier)
    return BfsTree(root=root, dist=dist, parent=parent, levels=levels, eccentricity=depth)


def connected_components(graph: Graph) -> np.ndarray:
    """Component label per node, labels assigned in order of first appearance."""
    labels = np.full(graph.num_nodes, -1, dtype=np.int64)
    current = 0
    for start in range(graph.num_nodes):
        if labels[start] != -1:
            continue
        stack = [start]
        labels[start] = current
        while stack:
            u = stack.pop()
            for v in graph.neighbors(u):
                if labels[v] == -1:
                    labels[v] = current
                    stack.append(v)
        current += 1
    return labels


def giant_component(graph: Graph):
    """Induced subgraph on the largest connected component.

    Returns the subgraph with ids compacted to 0..m-1 in ascending original
    id order, plus the old-to-new id map (-1 for dropped nodes). Ties on
    component size go to the component containing the smallest node id.
    """
    if graph.num_nodes == 0:
        raise ParameterError("giant_component of an empty graph is undefined")
    labels = connected_components(graph)
    sizes = np.bincount(labels)
    best = int(np.argmax(sizes))  # argmax takes the first maximum: smallest first-seen id
    keep = np.flatnonzero(labels == best)
    mapping = np.full(graph.num_nodes, -1, dtype=np.int64)
    mapping[keep] = np.arange(keep.shape[0], dtype=np.int64)
    mask = (mapping[graph.edges[:, 0]] != -1) & (mapping[graph.edges[:, 1]] != -1)
    sub_edges = mapping[graph.edges[mask]]
    sub = Graph.from_edges(int(keep.shape[0]), sub_edges)
    mapping.setflags(write=False)
    return sub, mapping


@dataclass(frozen=True)
class DegreeStats:
    min_degree: int
    max_degree: int
    mean_degree: Fraction
    num_edges: int


def degree_stats(graph: Graph) -> DegreeStats:
    """Exact degree statistics; the mean is a rational number."""
    if graph.num_nodes == 0:
        raise ParameterError("degree_stats of an empty graph is undefined")
    deg = graph.degrees()
    return DegreeStats(
        min_degree=int(deg.min()),
        max_degree=int(deg.max()),
        mean_degree=Fraction(2 * graph.num_edges, graph.num_nodes),
        num_edges=graph.num_edges,
    )

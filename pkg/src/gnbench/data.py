"""Dataset serialization, external import, feature slicing, and split construction.

On-disk layout of a dataset directory:

* ``edges.csv``   — header ``src,dst``, one undirected edge per line with
  ``src < dst``, 0-based ids, LF line endings.
* ``features.gft`` — binary: magic ``GFT1``, u32 version (1), u32 dtype code
  (1 = 32-bit float), u64 rows, u64 cols, all little-endian, followed by
  row-major little-endian 32-bit floats. Storage is 32-bit; in-memory
  computation stays 64-bit.
* ``labels.csv``  — optional; header ``label``, one class id per line in
  node order.
* ``meta.txt``    — ``key=value`` provenance lines (name, seeds, parameters).
"""

from __future__ import annotations

import csv
import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ParameterError, SamplingError
from .graph import Graph
from .synth import GraphDataset

logger = logging.getLogger(__name__)

GFT_MAGIC = b"GFT1"
GFT_VERSION = 1
GFT_DTYPE_F32 = 1
_GFT_HEADER = struct.Struct("<4sIIQQ")


def write_gft(path, matrix: np.ndarray) -> None:
    """Write a 2-D matrix as 32-bit floats in the .gft container."""
    matrix = np.ascontiguousarray(np.asarray(matrix), dtype="<f4")
    if matrix.ndim != 2:
        raise ParameterError("gft stores 2-D matrices only")
    with open(path, "wb") as fh:
        fh.write(_GFT_HEADER.pack(GFT_MAGIC, GFT_VERSION, GFT_DTYPE_F32,
                                  matrix.shape[0], matrix.shape[1]))
        fh.write(matrix.tobytes())


def read_gft(path) -> np.ndarray:
    """Read a .gft file, validating the header and payload size."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _GFT_HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, dtype, rows, cols = _GFT_HEADER.unpack_from(raw)
    if magic != GFT_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r} at offset 0")
    if version != GFT_VERSION:
        raise FormatError(f"{path}: unsupported version {version} at offset 4")
    if dtype != GFT_DTYPE_F32:
        raise FormatError(f"{path}: unknown dtype code {dtype} at offset 8")
    expected = rows * cols * 4
    payload = raw[_GFT_HEADER.size:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected} "
            f"for {rows}x{cols} float32"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(rows, cols).copy()


def _write_edges_csv(path, graph: Graph) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("src,dst\n")
        for u, v in graph.edges:
            fh.write(f"{u},{v}\n")


def _read_edges_csv(path, num_nodes: int) -> Graph:
    path = Path(path)
    edges = []
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n")
        if header != "src,dst":
            raise FormatError(f"{path}: line 1: expected header 'src,dst', got {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise FormatError(f"{path}: line {lineno}: expected 'src,dst'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: non-integer node id") from None
            if u == v:
                raise FormatError(f"{path}: line {lineno}: self-loop {u},{v}")
            if not u < v:
                raise FormatError(f"{path}: line {lineno}: edges must satisfy src < dst")
            edges.append((u, v))
    try:
        return Graph.from_edges(num_nodes, edges)
    except ParameterError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _write_labels_csv(path, labels: np.ndarray) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("label\n")
        for y in labels:
            fh.write(f"{y}\n")


def _read_labels_csv(path) -> np.ndarray:
    path = Path(path)
    values = []
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != "label":
            # headerless single-column files are accepted on import
            try:
                values.append(int(first))
            except ValueError:
                raise FormatError(f"{path}: line 1: expected 'label' header or an integer") from None
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(int(line))
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: non-integer label") from None
    return np.asarray(values, dtype=np.int64)


def _write_meta(path, entries: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        for key, value in entries.items():
            fh.write(f"{key}={value}\n")


def read_key_value(path) -> dict:
    """Parse a key=value file; '#' starts a comment, blank lines are skipped."""
    path = Path(path)
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FormatError(f"{path}: line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def save_dataset(ds: GraphDataset, out_dir) -> None:
    """Write edges.csv, features.gft, optional labels.csv, and meta.txt."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_edges_csv(out_dir / "edges.csv", ds.graph)
    write_gft(out_dir / "features.gft", ds.features)
    if ds.labels is not None:
        _write_labels_csv(out_dir / "labels.csv", ds.labels)
    meta = {"name": ds.name, "num_nodes": ds.graph.num_nodes,
            "num_edges": ds.graph.num_edges, "num_features": ds.num_features,
            "has_labels": str(ds.labels is not None).lower()}
    meta.update(ds.provenance)
    _write_meta(out_dir / "meta.txt", meta)


def load_dataset(in_dir) -> GraphDataset:
    """Load a dataset directory, enforcing graph and feature invariants."""
    in_dir = Path(in_dir)
    meta = read_key_value(in_dir / "meta.txt")
    features = read_gft(in_dir / "features.gft").astype(np.float64)
    graph = _read_edges_csv(in_dir / "edges.csv", features.shape[0])
    declared = meta.get("num_nodes")
    if declared is not None and int(declared) != features.shape[0]:
        raise FormatError(
            f"{in_dir / 'features.gft'}: {features.shape[0]} feature rows but "
            f"meta.txt declares num_nodes={declared}"
        )
    labels = None
    labels_path = in_dir / "labels.csv"
    if labels_path.exists():
        labels = _read_labels_csv(labels_path)
        if labels.shape[0] != features.shape[0]:
            raise FormatError(
                f"{labels_path}: {labels.shape[0]} labels for {features.shape[0]} nodes"
            )
    provenance = {k: v for k, v in meta.items()
                  if k not in ("name", "num_nodes", "num_edges", "num_features", "has_labels")}
    return GraphDataset(graph=graph, features=features, labels=labels,
                        name=meta.get("name", in_dir.name), provenance=provenance)


def _read_feature_csv(path) -> np.ndarray:
    path = Path(path)
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            try:
                row = [float(x) for x in record]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise FormatError(f"{path}: line {lineno}: non-numeric feature value") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise FormatError(
                    f"{path}: line {lineno}: ragged row ({len(row)} values, expected {width})"
                )
            rows.append(row)
    if not rows:
        raise FormatError(f"{path}: no feature rows")
    return np.asarray(rows, dtype=np.float64)


def import_external(edges_path, features_path, labels_path=None,
                    name: str = "") -> GraphDataset:
    """Import a dataset from loose files.

    The feature file (CSV matrix or .gft) defines the node universe; edge
    ids must index feature rows. Directed duplicates are collapsed to one
    undirected edge, self-loops are dropped, and both are counted in a
    warning. Nodes that never appear in the edge file are retained with
    degree zero.
    """
    features_path = Path(features_path)
    if features_path.suffix == ".gft":
        features = read_gft(features_path).astype(np.float64)
    else:
        features = _read_feature_csv(features_path)
    num_nodes = features.shape[0]

    edges_path = Path(edges_path)
    seen = set()
    dropped_self = 0
    dropped_dup = 0
    with open(edges_path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if len(record) != 2:
                raise FormatError(f"{edges_path}: line {lineno}: expected two columns")
            try:
                u, v = int(record[0]), int(record[1])
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise FormatError(f"{edges_path}: line {lineno}: non-integer node id") from None
            if u < 0 or v < 0:
                raise FormatError(f"{edges_path}: line {lineno}: negative node id")
            if u >= num_nodes or v >= num_nodes:
                raise FormatError(
                    f"{edges_path}: line {lineno}: node id {max(u, v)} exceeds the "
                    f"{num_nodes} feature rows"
                )
            if u == v:
                dropped_self += 1
                continue
            key = (min(u, v), max(u, v))
            if key in seen:
                dropped_dup += 1
                continue
            seen.add(key)
    if dropped_self or dropped_dup:
        logger.warning("import: dropped %d self-loop(s) and %d duplicate edge(s)",
                       dropped_self, dropped_dup)
    graph = Graph.from_edges(num_nodes, sorted(seen))

    labels = None
    if labels_path is not None:
        labels = _read_labels_csv(labels_path)
        if labels.shape[0] != num_nodes:
            raise FormatError(
                f"{labels_path}: {labels.shape[0]} labels for {num_nodes} nodes"
            )
    return GraphDataset(
        graph=graph, features=features, labels=labels,
        name=name or edges_path.stem,
        provenance={"source_edges": str(edges_path), "source_features": str(features_path)},
    )


def slice_features(ds: GraphDataset, n: int) -> GraphDataset:
    """Restrict the dataset to its first n feature columns."""
    if not 1 <= n <= ds.num_features:
        raise ParameterError(f"n must lie in [1, {ds.num_features}], got {n}")
    if n == ds.num_features:
        return ds
    return GraphDataset(
        graph=ds.graph,
        features=ds.features[:, :n].copy(),
        labels=ds.labels,
        name=f"{ds.name}-{n}",
        provenance=dict(ds.provenance, sliced_from=ds.name, feature_prefix=str(n)),
    )


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------


@dataclass
class LinkSplit:
    """Edge partition for link prediction with frozen evaluation negatives."""

    train_pos: np.ndarray     # (m, 2)
    val_pos: np.ndarray
    test_pos: np.ndarray
    val_neg: np.ndarray
    test_neg: np.ndarray
    message_graph: Graph      # train_pos edges only


@dataclass
class NodeSplit:
    train_ids: np.ndarray
    val_ids: np.ndarray
    test_ids: np.ndarray


def edge_keys(edges: np.ndarray, num_nodes: int) -> np.ndarray:
    """Sorted scalar keys (u * n + v with u < v) for O(log E) membership tests."""
    lo = np.minimum(edges[:, 0], edges[:, 1]).astype(np.int64)
    hi = np.maximum(edges[:, 0], edges[:, 1]).astype(np.int64)
    return np.sort(lo * num_nodes + hi)


def sample_non_edges(num_nodes: int, forbidden_keys: np.ndarray, count: int,
                     rng: np.random.Generator, max_factor: int = 100) -> np.ndarray:
    """Draw ``count`` distinct non-edges uniformly, rejecting forbidden pairs.

    ``forbidden_keys`` must be sorted scalar keys from ``edge_keys``. Raises
    SamplingError after ``max_factor * count`` candidate draws.
    """
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)
    chosen: list = []
    chosen_keys = set()
    attempts = 0
    budget = max_factor * count
    while len(chosen) < count:
        batch = min(max(count - len(chosen), 64) * 2, budget - attempts)
        if batch <= 0:
            raise SamplingError(
                f"could not find {count} non-edges after {attempts} draws; graph too dense"
            )
        attempts += batch
        cand = rng.integers(0, num_nodes, size=(batch, 2))
        cand = cand[cand[:, 0] != cand[:, 1]]
        lo = np.minimum(cand[:, 0], cand[:, 1])
        hi = np.maximum(cand[:, 0], cand[:, 1])
        keys = lo * num_nodes + hi
        if forbidden_keys.size:
            pos = np.searchsorted(forbidden_keys, keys).clip(max=forbidden_keys.shape[0] - 1)
            keep = forbidden_keys[pos] != keys
        else:
            keep = np.ones(keys.shape[0], dtype=bool)
        for key, u, v in zip(keys[keep], lo[keep], hi[keep]):
            if key in chosen_keys:
                continue
            chosen_keys.add(key)
            chosen.append((u, v))
            if len(chosen) == count:
                break
    return np.asarray(chosen, dtype=np.int64)


def link_split(ds: GraphDataset, ratios: tuple, seed: int) -> LinkSplit:
    """Partition edges uniformly at random into train/val/test positives.

    Negatives are sampled uniformly from non-edges (excluding every positive)
    1:1 with the val and test positives and frozen; training negatives are
    the trainer's job, resampled each epoch.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ParameterError("ratios must be three positive numbers")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ParameterError(f"ratios must sum to 1, got {sum(ratios)}")
    edges = ds.graph.edges
    n_edges = edges.shape[0]
    n_val = int(round(n_edges * ratios[1]))
    n_test = int(round(n_edges * ratios[2]))
    n_train = n_edges - n_val - n_test
    if min(n_train, n_val, n_test) < 1:
        raise ParameterError(
            f"split sizes ({n_train}/{n_val}/{n_test}) must all be positive; "
            "graph has too few edges for these ratios"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_edges)
    train_pos = edges[np.sort(perm[:n_train])]
    val_pos = edges[np.sort(perm[n_train:n_train + n_val])]
    test_pos = edges[np.sort(perm[n_train + n_val:])]
    keys = edge_keys(edges, ds.graph.num_nodes)
    negs = sample_non_edges(ds.graph.num_nodes, keys, n_val + n_test, rng)
    return LinkSplit(
        train_pos=train_pos, val_pos=val_pos, test_pos=test_pos,
        val_neg=negs[:n_val], test_neg=negs[n_val:],
        message_graph=Graph.from_edges(ds.graph.num_nodes, train_pos),
    )


def node_split(ds: GraphDataset, seed: int, per_class: int | None = None,
               val_count: int | None = None,
               ratios: tuple | None = None) -> NodeSplit:
    """Partition nodes for classification.

    Per-class policy (the convention of the co-purchase benchmark setups):
    ``per_class`` training nodes sampled from every class, ``val_count``
    validation nodes from the remainder, rest test. Ratio policy: uniform
    split by ``ratios``.
    """
    if ds.labels is None:
        raise ParameterError("node_split requires labels")
    rng = np.random.default_rng(seed)
    n = ds.graph.num_nodes
    if per_class is not None:
        if val_count is None:
            raise ParameterError("per-class policy needs val_count")
        train = []
        for c in range(ds.num_classes):
            members = np.flatnonzero(ds.labels == c)
            if members.shape[0] < per_class:
                raise ParameterError(
                    f"class {c} has {members.shape[0]} nodes, fewer than per_class={per_class}"
                )
            train.append(rng.choice(members, size=per_class, replace=False))
        train_ids = np.sort(np.concatenate(train))
        pool = np.setdiff1d(np.arange(n), train_ids)
        if pool.shape[0] < val_count:
            raise ParameterError("not enough nodes left for validation")
        val_ids = np.sort(rng.choice(pool, size=val_count, replace=False))
        test_ids = np.setdiff1d(pool, val_ids)
        return NodeSplit(train_ids=train_ids, val_ids=val_ids, test_ids=test_ids)
    if ratios is None:
        raise ParameterError("node_split needs either per_class or ratios")
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ParameterError("ratios must be three positive numbers")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ParameterError(f"ratios must sum to 1, got {sum(ratios)}")
    n_val = int(round(n * ratios[1]))
    n_test = int(round(n * ratios[2]))
    n_train = n - n_val - n_test
    if min(n_train, n_val, n_test) < 1:
        raise ParameterError("split sizes must all be positive")
    perm = rng.permutation(n)
    return NodeSplit(
        train_ids=np.sort(perm[:n_train]),
        val_ids=np.sort(perm[n_train:n_train + n_val]),
        test_ids=np.sort(perm[n_train + n_val:]),
    )

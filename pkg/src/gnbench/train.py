"""Full-batch training with early stopping, and cross-trial aggregation."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import autodiff, models
from .autodiff import Tensor
from .data import LinkSplit, NodeSplit, edge_keys, sample_non_edges
from .errors import DivergenceError, ParameterError
from .metrics import accuracy, roc_auc
from .models import AdamState, GcnConfig, MlpConfig
from .synth import GraphDataset


@dataclass(frozen=True)
class TrainConfig:
    """One global training policy. Inconsistent early stopping is a classic
    source of incomparable benchmark numbers, so patience and the epoch cap
    live here and are never part of a hyperparameter search."""

    max_epochs: int = 2000
    patience: int = 100
    lr: float = 0.01
    weight_decay: float = 0.0
    dropout: float = 0.0
    seed: int = 0
    eval_every: int = 1
    task: str = "link"
    standardize: bool = False

    def __post_init__(self):
        if self.lr <= 0:
            raise ParameterError("lr must be positive")
        if not 0 < self.patience <= self.max_epochs:
            raise ParameterError("patience must lie in (0, max_epochs]")
        if self.eval_every < 1:
            raise ParameterError("eval_every must be >= 1")
        if self.task not in ("link", "node"):
            raise ParameterError(f"unknown task {self.task!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ParameterError("dropout must lie in [0, 1)")


@dataclass
class TrainReport:
    best_val_metric: float
    test_metric_at_best_val: float
    best_epoch: int
    epochs_run: int
    loss_curve: np.ndarray
    val_epochs: np.ndarray
    val_curve: np.ndarray
    config: dict
    wall_time_s: float
    params: list                # best-validation checkpoint (raw arrays)


@dataclass
class MetricSummary:
    values: list
    mean: float
    std: float
    n_trials: int

    @classmethod
    def from_values(cls, values) -> "MetricSummary":
        values = [float(v) for v in values]
        if not values:
            raise ParameterError("summary needs at least one value")
        mean = float(np.mean(values))
        std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        return cls(values=values, mean=mean, std=std, n_trials=len(values))


def _standardize(features: np.ndarray) -> np.ndarray:
    mean = features.mean(axis=0, keepdims=True)
    std = features.std(axis=0, keepdims=True)
    std[std < 1e-12] = 1.0
    return (features - mean) / std


def _trial_streams(seed: int):
    words = np.random.SeedSequence(seed).generate_state(3, dtype=np.uint64)
    return (int(words[0]), np.random.default_rng(int(words[1])),
            np.random.default_rng(int(words[2])))


class _EarlyStopper:
    """Tracks the best validation metric and the checkpoint that achieved it."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_val = -np.inf
        self.best_epoch = 0
        self.snapshot = None

    def observe(self, epoch: int, value: float, params: list) -> None:
        if value > self.best_val:
            self.best_val = value
            self.best_epoch = epoch
            self.snapshot = models.clone_params(params)

    def should_stop(self, epoch: int) -> bool:
        return self.snapshot is not None and epoch - self.best_epoch >= self.patience


def _encoder(model_cfg, params, adj, x, train_mode, rng):
    if isinstance(model_cfg, MlpConfig):
        return models.mlp_forward(model_cfg, params, x, train_mode, rng)
    return models.gcn_forward(model_cfg, params, adj, x, train_mode, rng)


def _check_finite(loss_value: float, epoch: int, tc: TrainConfig) -> None:
    if not np.isfinite(loss_value):
        raise DivergenceError(f"non-finite loss at epoch {epoch} (lr={tc.lr})")


def _apply_weight_decay(params, weight_decay: float) -> None:
    if weight_decay == 0.0:
        return
    for p in params:
        if p.grad is None:
            p.grad = weight_decay * p.data
        else:
            p.grad += weight_decay * p.data


def train_link(model_cfg, ds: GraphDataset, split: LinkSplit, tc: TrainConfig) -> TrainReport:
    """Train an encoder for link prediction.

    Each epoch scores the train positives against freshly resampled
    uniform negatives (1:1); a GCN encoder propagates only over the
    message graph. Validation ROC AUC on the frozen split drives early
    stopping, and the test metric is reported at the best-validation
    checkpoint.
    """
    started = time.perf_counter()
    model_cfg = replace(model_cfg, dropout=tc.dropout)
    feats = _standardize(ds.features) if tc.standardize else ds.features
    x = Tensor(feats)
    n = ds.graph.num_nodes
    adj = None
    if isinstance(model_cfg, GcnConfig):
        adj = models.normalize_adjacency(split.message_graph, model_cfg.self_loops)
    init_seed, dropout_rng, neg_rng = _trial_streams(tc.seed)
    params = (models.init_mlp(model_cfg, init_seed) if isinstance(model_cfg, MlpConfig)
              else models.init_gcn(model_cfg, init_seed))
    state = AdamState.for_params(params, lr=tc.lr)
    all_keys = edge_keys(ds.graph.edges, n)
    n_train = split.train_pos.shape[0]
    train_labels = np.concatenate([np.ones(n_train), np.zeros(n_train)])
    val_pairs = np.vstack([split.val_pos, split.val_neg])
    val_labels = np.concatenate([np.ones(split.val_pos.shape[0]),
                                 np.zeros(split.val_neg.shape[0])])
    test_pairs = np.vstack([split.test_pos, split.test_neg])
    test_labels = np.concatenate([np.ones(split.test_pos.shape[0]),
                                  np.zeros(split.test_neg.shape[0])])

    def eval_auc(pairs, labels) -> float:
        z = _encoder(model_cfg, params, adj, x, False, None)
        scores = models.link_logits(z, pairs).data[:, 0]
        return roc_auc(scores, labels)

    stopper = _EarlyStopper(tc.patience)
    losses = []
    val_epochs, val_values = [], []
    epoch = 0
    for epoch in range(1, tc.max_epochs + 1):
        negs = sample_non_edges(n, all_keys, n_train, neg_rng)
        pairs = np.vstack([split.train_pos, negs])
        z = _encoder(model_cfg, params, adj, x, True, dropout_rng)
        logits = models.link_logits(z, pairs)
        loss = autodiff.bce_with_logits(logits, train_labels)
        loss_value = float(loss.data[0, 0])
        _check_finite(loss_value, epoch, tc)
        losses.append(loss_value)
        models.zero_grads(params)
        loss.backward()
        _apply_weight_decay(params, tc.weight_decay)
        models.adam_step(params, state)
        if epoch % tc.eval_every == 0 or epoch == tc.max_epochs:
            val = eval_auc(val_pairs, val_labels)
            val_epochs.append(epoch)
            val_values.append(val)
            stopper.observe(epoch, val, params)
            if stopper.should_stop(epoch):
                break
    models.restore_params(params, stopper.snapshot)
    test = eval_auc(test_pairs, test_labels)
    return TrainReport(
        best_val_metric=stopper.best_val,
        test_metric_at_best_val=test,
        best_epoch=stopper.best_epoch,
        epochs_run=epoch,
        loss_curve=np.asarray(losses),
        val_epochs=np.asarray(val_epochs, dtype=np.int64),
        val_curve=np.asarray(val_values),
        config=dict(vars(tc), model=type(model_cfg).__name__, **_cfg_dict(model_cfg)),
        wall_time_s=time.perf_counter() - started,
        params=stopper.snapshot,
    )


def train_node(model_cfg, ds: GraphDataset, split: NodeSplit, tc: TrainConfig) -> TrainReport:
    """Train a node classifier with cross-entropy on the train ids and
    early stopping on validation accuracy."""
    if ds.labels is None:
        raise ParameterError("node task requires labels")
    started = time.perf_counter()
    model_cfg = replace(model_cfg, dropout=tc.dropout)
    feats = _standardize(ds.features) if tc.standardize else ds.features
    x = Tensor(feats)
    adj = None
    if isinstance(model_cfg, GcnConfig):
        adj = models.normalize_adjacency(ds.graph, model_cfg.self_loops)
    init_seed, dropout_rng, _ = _trial_streams(tc.seed)
    params = (models.init_mlp(model_cfg, init_seed) if isinstance(model_cfg, MlpConfig)
              else models.init_gcn(model_cfg, init_seed))
    state = AdamState.for_params(params, lr=tc.lr)
    y = ds.labels

    def eval_acc(ids) -> float:
        logits = _encoder(model_cfg, params, adj, x, False, None)
        pred = logits.data[ids].argmax(axis=1)
        return accuracy(pred, y[ids])

    stopper = _EarlyStopper(tc.patience)
    losses = []
    val_epochs, val_values = [], []
    epoch = 0
    for epoch in range(1, tc.max_epochs + 1):
        logits = _encoder(model_cfg, params, adj, x, True, dropout_rng)
        train_logits = autodiff.take_rows(logits, split.train_ids)
        loss = autodiff.softmax_cross_entropy(train_logits, y[split.train_ids])
        loss_value = float(loss.data[0, 0])
        _check_finite(loss_value, epoch, tc)
        losses.append(loss_value)
        models.zero_grads(params)
        loss.backward()
        _apply_weight_decay(params, tc.weight_decay)
        models.adam_step(params, state)
        if epoch % tc.eval_every == 0 or epoch == tc.max_epochs:
            val = eval_acc(split.val_ids)
            val_epochs.append(epoch)
            val_values.append(val)
            stopper.observe(epoch, val, params)
            if stopper.should_stop(epoch):
                break
    models.restore_params(params, stopper.snapshot)
    test = eval_acc(split.test_ids)
    return TrainReport(
        best_val_metric=stopper.best_val,
        test_metric_at_best_val=test,
        best_epoch=stopper.best_epoch,
        epochs_run=epoch,
        loss_curve=np.asarray(losses),
        val_epochs=np.asarray(val_epochs, dtype=np.int64),
        val_curve=np.asarray(val_values),
        config=dict(vars(tc), model=type(model_cfg).__name__, **_cfg_dict(model_cfg)),
        wall_time_s=time.perf_counter() - started,
        params=stopper.snapshot,
    )


def _cfg_dict(model_cfg) -> dict:
    return {f"model_{k}": v for k, v in asdict(model_cfg).items()}


def run_trials(job: Callable[[int], TrainReport], n_trials: int = 5,
               base_seed: int = 0, metric: str = "test") -> MetricSummary:
    """Run ``job`` with seeds base_seed..base_seed+n_trials-1 and aggregate
    into mean and sample standard deviation.

    ``metric`` picks the aggregated quantity: "test" (the reported number)
    or "val" (what a hyperparameter search optimizes).
    """
    if n_trials < 1:
        raise ParameterError("n_trials must be >= 1")
    if metric not in ("test", "val"):
        raise ParameterError(f"unknown metric {metric!r}")
    reports = [job(base_seed + t) for t in range(n_trials)]
    values = [r.test_metric_at_best_val if metric == "test" else r.best_val_metric
              for r in reports]
    return MetricSummary.from_values(values)


def write_report(report: TrainReport, out_dir) -> None:
    """Serialize a report as key=value lines plus a CSV of epoch curves."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.txt", "w", newline="\n") as fh:
        fh.write(f"best_val_metric={report.best_val_metric!r}\n")
        fh.write(f"test_metric_at_best_val={report.test_metric_at_best_val!r}\n")
        fh.write(f"best_epoch={report.best_epoch}\n")
        fh.write(f"epochs_run={report.epochs_run}\n")
        fh.write(f"wall_time_s={report.wall_time_s:.3f}\n")
        for key, value in sorted(report.config.items()):
            fh.write(f"config_{key}={value}\n")
    val_at = dict(zip(report.val_epochs.tolist(), report.val_curve.tolist()))
    with open(out_dir / "curves.csv", "w", newline="\n") as fh:
        fh.write("epoch,loss,val_metric\n")
        for i, loss in enumerate(report.loss_curve, start=1):
            val = val_at.get(i, "")
            val_str = repr(val) if val != "" else ""
            fh.write(f"{i},{loss!r},{val_str}\n")

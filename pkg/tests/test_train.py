from dataclasses import dataclass

import numpy as np
import pytest

from gnbench import autodiff
from gnbench.autodiff import Tensor
from gnbench.data import link_split, node_split
from gnbench.errors import DivergenceError, MetricError, ParameterError
from gnbench.graph import Graph, WsParams, bfs, watts_strogatz
from gnbench.metrics import accuracy, roc_auc
from gnbench.models import GcnConfig, MlpConfig, link_logits, mlp_forward, normalize_adjacency, gcn_forward
from gnbench.synth import GaussianSpec, GraphDataset, SynthParams, sample_iid_features, synthesize_parametric
from gnbench.train import (MetricSummary, TrainConfig, run_trials, train_link,
                           train_node, write_report)


def brute_force_auc(scores, labels) -> float:
    """O(P*N) pairwise counting with ties worth one half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def test_auc_perfect_ranking():
    assert roc_auc([0.9, 0.8, 0.1], [1, 1, 0]) == 1.0


def test_auc_tie_case():
    # one tie (0.5) counts half, one clean win counts one: (0.5 + 1) / 2
    assert roc_auc([0.5, 0.5, 0.2], [1, 0, 0]) == pytest.approx(0.75)


def test_auc_shuffled_labels_near_half():
    rng = np.random.default_rng(0)
    scores = rng.standard_normal(10_000)
    labels = rng.integers(0, 2, size=10_000)
    assert abs(roc_auc(scores, labels) - 0.5) < 0.02


def test_auc_matches_brute_force_with_ties():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(2, 60))
        scores = rng.integers(0, 5, size=n).astype(float)  # heavy ties
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        assert roc_auc(scores, labels) == pytest.approx(
            brute_force_auc(scores, labels), abs=1e-12)


def test_auc_single_class_errors():
    with pytest.raises(MetricError):
        roc_auc([0.1, 0.2], [1, 1])


def test_accuracy_cases():
    assert accuracy([1, 2, 3], [1, 2, 3]) == 1.0
    assert accuracy([1, 2, 3], [0, 0, 0]) == 0.0
    assert accuracy([1, 2, 3, 4], [1, 2, 3, 0]) == 0.75


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


@dataclass
class _StubReport:
    test_metric_at_best_val: float
    best_val_metric: float


def test_run_trials_constant_metric():
    summary = run_trials(lambda seed: _StubReport(0.7, 0.8), n_trials=5, base_seed=0)
    assert summary.mean == pytest.approx(0.7)
    assert summary.std == 0.0


def test_run_trials_hand_arithmetic():
    values = {10: 1.0, 11: 2.0, 12: 3.0}
    summary = run_trials(lambda seed: _StubReport(values[seed], 0.0),
                         n_trials=3, base_seed=10)
    assert summary.mean == pytest.approx(2.0)
    assert summary.std == pytest.approx(1.0)


def test_run_trials_val_metric_selector():
    summary = run_trials(lambda seed: _StubReport(0.0, float(seed)), n_trials=2,
                         base_seed=5, metric="val")
    assert summary.values == [5.0, 6.0]


def test_metric_summary_single_value():
    s = MetricSummary.from_values([4.2])
    assert s.std == 0.0 and s.n_trials == 1


# ---------------------------------------------------------------------------
# training fixtures
# ---------------------------------------------------------------------------


def small_link_dataset(seed=0):
    g = watts_strogatz(WsParams(n=60, k=4, beta=0.3, seed=seed))
    feats = sample_iid_features(60, GaussianSpec(8), seed=seed + 1)
    return GraphDataset(graph=g, features=feats, name="toy")


def quick_tc(**kwargs):
    defaults = dict(max_epochs=40, patience=40, lr=0.02, seed=0, eval_every=5)
    defaults.update(kwargs)
    return TrainConfig(**defaults)


def report_key(report):
    return (report.best_val_metric, report.test_metric_at_best_val, report.best_epoch,
            report.epochs_run, report.loss_curve.tobytes(), report.val_curve.tobytes())


# ---------------------------------------------------------------------------
# link training
# ---------------------------------------------------------------------------


def test_train_link_mlp_runs_and_reports():
    ds = small_link_dataset()
    split = link_split(ds, (0.7, 0.15, 0.15), seed=1)
    report = train_link(MlpConfig(in_dim=8, hidden_dims=(16,), out_dim=8),
                        ds, split, quick_tc())
    assert 0.0 <= report.test_metric_at_best_val <= 1.0
    assert report.best_epoch in report.val_epochs
    assert len(report.loss_curve) == report.epochs_run


def test_train_link_deterministic():
    ds = small_link_dataset()
    split = link_split(ds, (0.7, 0.15, 0.15), seed=1)
    cfg = GcnConfig(in_dim=8, hidden_dim=8, out_dim=8)
    a = train_link(cfg, ds, split, quick_tc(dropout=0.3))
    b = train_link(cfg, ds, split, quick_tc(dropout=0.3))
    assert report_key(a) == report_key(b)


def test_train_link_checkpoint_reproduces_test_metric():
    ds = small_link_dataset()
    split = link_split(ds, (0.7, 0.15, 0.15), seed=1)
    cfg = MlpConfig(in_dim=8, hidden_dims=(12,), out_dim=6)
    report = train_link(cfg, ds, split, quick_tc(dropout=0.2))
    params = [Tensor(p) for p in report.params]
    z = mlp_forward(MlpConfig(in_dim=8, hidden_dims=(12,), out_dim=6, dropout=0.2),
                    params, Tensor(ds.features))
    pairs = np.vstack([split.test_pos, split.test_neg])
    labels = np.concatenate([np.ones(len(split.test_pos)), np.zeros(len(split.test_neg))])
    scores = link_logits(z, pairs).data[:, 0]
    assert abs(roc_auc(scores, labels) - report.test_metric_at_best_val) < 1e-12


def test_train_link_gcn_uses_message_graph_only():
    # embeddings must not change when val/test edges change, given the same
    # message graph and seeds
    ds = small_link_dataset()
    split = link_split(ds, (0.7, 0.15, 0.15), seed=1)
    cfg = GcnConfig(in_dim=8, hidden_dim=8, out_dim=8)
    adj = normalize_adjacency(split.message_graph, True)
    assert adj.num_nodes == ds.graph.num_nodes
    assert split.message_graph.num_edges < ds.graph.num_edges


def test_train_link_divergence_aborts():
    ds = small_link_dataset()
    split = link_split(ds, (0.7, 0.15, 0.15), seed=1)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(DivergenceError, match="lr"):
            train_link(MlpConfig(in_dim=8, hidden_dims=(16,), out_dim=8), ds, split,
                       quick_tc(lr=1e155, max_epochs=20, patience=20))


def test_train_link_standardize_flag():
    ds = small_link_dataset()
    split = link_split(ds, (0.7, 0.15, 0.15), seed=1)
    cfg = MlpConfig(in_dim=8, hidden_dims=(8,), out_dim=4)
    a = train_link(cfg, ds, split, quick_tc())
    b = train_link(cfg, ds, split, quick_tc(standardize=True))
    assert a.loss_curve[0] != b.loss_curve[0]


# ---------------------------------------------------------------------------
# node training
# ---------------------------------------------------------------------------


def one_hot_label_dataset(n=120, classes=3, seed=0):
    g = watts_strogatz(WsParams(n=n, k=4, beta=0.2, seed=seed))
    labels = np.random.default_rng(seed).integers(0, classes, size=n)
    feats = np.eye(classes)[labels]
    return GraphDataset(graph=g, features=feats, labels=labels, name="onehot")


def test_train_node_one_hot_features_reach_perfect_accuracy():
    ds = one_hot_label_dataset()
    split = node_split(ds, seed=0, per_class=10, val_count=20)
    report = train_node(MlpConfig(in_dim=3, hidden_dims=(8,), out_dim=3), ds, split,
                        quick_tc(max_epochs=200, patience=200, lr=0.05))
    assert report.test_metric_at_best_val == 1.0


def test_train_node_random_labels_stay_at_chance():
    rng = np.random.default_rng(2)
    g = watts_strogatz(WsParams(n=600, k=4, beta=0.3, seed=2))
    ds = GraphDataset(graph=g, features=rng.standard_normal((600, 16)),
                      labels=rng.integers(0, 3, size=600), name="chance")
    split = node_split(ds, seed=0, per_class=20, val_count=30)
    report = train_node(MlpConfig(in_dim=16, hidden_dims=(32,), out_dim=3), ds, split,
                        quick_tc(max_epochs=150, patience=150, lr=0.01))
    assert abs(report.test_metric_at_best_val - 1.0 / 3.0) < 0.05


def test_train_node_structural_labels_favor_gcn():
    # labels depend only on graph distance parity; features carry parental
    # dependence, so propagation helps while a feature-only model stays near chance
    g = watts_strogatz(WsParams(n=300, k=4, beta=0.2, seed=5))
    tree = bfs(g, 0)
    labels = (tree.dist % 2).astype(np.int64)
    feats = synthesize_parametric(g, SynthParams(GaussianSpec(16), root=0,
                                                 gamma=0.8, nu=1.0, seed=9))
    ds = GraphDataset(graph=g, features=feats, labels=labels, name="parity")
    split = node_split(ds, seed=1, per_class=40, val_count=40)
    tc = quick_tc(max_epochs=300, patience=300, lr=0.02)
    gcn = train_node(GcnConfig(in_dim=16, hidden_dim=32, out_dim=2), ds, split, tc)
    mlp = train_node(MlpConfig(in_dim=16, hidden_dims=(32,), out_dim=2), ds, split, tc)
    assert gcn.test_metric_at_best_val >= mlp.test_metric_at_best_val


def test_train_node_determinism():
    ds = one_hot_label_dataset()
    split = node_split(ds, seed=0, per_class=10, val_count=20)
    cfg = GcnConfig(in_dim=3, hidden_dim=8, out_dim=3)
    a = train_node(cfg, ds, split, quick_tc(dropout=0.2))
    b = train_node(cfg, ds, split, quick_tc(dropout=0.2))
    assert report_key(a) == report_key(b)


def test_train_node_requires_labels():
    ds = small_link_dataset()
    with pytest.raises(ParameterError):
        train_node(MlpConfig(in_dim=8, hidden_dims=(), out_dim=2), ds, None, quick_tc())


# ---------------------------------------------------------------------------
# report files
# ---------------------------------------------------------------------------


def test_write_report_files(tmp_path):
    ds = small_link_dataset()
    split = link_split(ds, (0.7, 0.15, 0.15), seed=1)
    report = train_link(MlpConfig(in_dim=8, hidden_dims=(8,), out_dim=4), ds, split,
                        quick_tc(max_epochs=20, patience=20))
    write_report(report, tmp_path)
    text = (tmp_path / "report.txt").read_text()
    assert "test_metric_at_best_val=" in text
    assert "config_lr=" in text
    curves = (tmp_path / "curves.csv").read_text().splitlines()
    assert curves[0] == "epoch,loss,val_metric"
    assert len(curves) == 1 + report.epochs_run

"""Synthetic small-world graph benchmarks and feature-leakage studies."""

__version__ = "0.1.0"

from .graph import BfsTree, DegreeStats, Graph, WsParams, bfs, degree_stats, giant_component, watts_strogatz
from .synth import (GaussianSpec, GraphDataset, SynthParams, make_ws1000,
                    make_ws1000_gamma, sample_iid_features, synthesize_parametric)
from .data import (LinkSplit, NodeSplit, import_external, link_split, load_dataset,
                   node_split, save_dataset, slice_features)
from .metrics import accuracy, roc_auc
from .models import (AdamState, GcnConfig, MlpConfig, NormAdj, adam_step, gcn_forward,
                     init_gcn, init_mlp, link_logits, mlp_forward, normalize_adjacency)
from .train import MetricSummary, TrainConfig, TrainReport, run_trials, train_link, train_node
from .sweep import SearchSpace, StudyReport, TuneSettings, feature_study, gamma_study, random_search

__all__ = [
    "__version__",
    "Graph", "WsParams", "BfsTree", "DegreeStats",
    "watts_strogatz", "bfs", "giant_component", "degree_stats",
    "GaussianSpec", "SynthParams", "GraphDataset",
    "sample_iid_features", "synthesize_parametric", "make_ws1000", "make_ws1000_gamma",
    "LinkSplit", "NodeSplit", "save_dataset", "load_dataset", "import_external",
    "slice_features", "link_split", "node_split",
    "roc_auc", "accuracy",
    "MlpConfig", "GcnConfig", "NormAdj", "AdamState",
    "normalize_adjacency", "init_mlp", "init_gcn", "mlp_forward", "gcn_forward",
    "link_logits", "adam_step",
    "TrainConfig", "TrainReport", "MetricSummary",
    "train_link", "train_node", "run_trials",
    "SearchSpace", "TuneSettings", "StudyReport",
    "random_search", "feature_study", "gamma_study",
]

"""Random hyperparameter search and the feature-count / parental-coupling studies."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .data import LinkSplit, link_split, node_split, slice_features
from .errors import DivergenceError, ParameterError, SweepError
from .models import GcnConfig, MlpConfig
from .synth import GraphDataset, make_ws1000_gamma
from .train import MetricSummary, TrainConfig, run_trials, train_link, train_node

logger = logging.getLogger(__name__)

LINK_SPLIT_RATIOS = (0.85, 0.05, 0.10)


@dataclass(frozen=True)
class SearchSpace:
    """Per-hyperparameter sampling domains for random search.

    ``lr`` and ``weight_decay`` are log-uniform; weight decay is zero with
    probability ``weight_decay_zero_prob``. Epoch budget and patience are
    fixed by the global training policy, not searched.
    """

    lr_range: tuple = (1e-4, 1e-1)
    weight_decay_range: tuple = (1e-6, 1e-2)
    weight_decay_zero_prob: float = 0.25
    dropout_range: tuple = (0.0, 0.7)
    hidden_dims: tuple = (16, 64, 128, 256)
    num_layers: tuple = (1, 2, 3)

    def __post_init__(self):
        for name in ("lr_range", "weight_decay_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise ParameterError(f"{name} must be a positive log-range")
        lo, hi = self.dropout_range
        if not (0.0 <= lo <= hi < 1.0):
            raise ParameterError("dropout_range must lie within [0, 1)")
        if not self.hidden_dims or not self.num_layers:
            raise ParameterError("categorical domains must be non-empty")
        if not 0.0 <= self.weight_decay_zero_prob <= 1.0:
            raise ParameterError("weight_decay_zero_prob must lie in [0, 1]")


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def sample_config(space: SearchSpace, rng: np.random.Generator) -> dict:
    """Draw one configuration; the draw order is fixed for reproducibility."""
    lr = _log_uniform(rng, *space.lr_range)
    if rng.random() < space.weight_decay_zero_prob:
        weight_decay = 0.0
    else:
        weight_decay = _log_uniform(rng, *space.weight_decay_range)
    dropout = float(rng.uniform(*space.dropout_range))
    hidden_dim = int(space.hidden_dims[rng.integers(len(space.hidden_dims))])
    num_layers = int(space.num_layers[rng.integers(len(space.num_layers))])
    return {"lr": lr, "weight_decay": weight_decay, "dropout": dropout,
            "hidden_dim": hidden_dim, "num_layers": num_layers}


@dataclass
class SweepEntry:
    index: int
    config: dict
    summary: MetricSummary | None
    error: str = ""


def random_search(space: SearchSpace, budget: int,
                  objective: Callable[[dict], MetricSummary], seed: int,
                  n_jobs: int = 1):
    """Sample ``budget`` configs i.i.d. and evaluate each on the validation metric.

    Returns (best config, leaderboard). Configs are sampled up front, so the
    leaderboard is identical whatever the worker count; ties on the mean
    break toward the earlier sample. Raises SweepError if every config
    diverged.
    """
    if budget < 1:
        raise ParameterError("budget must be >= 1")
    rng = np.random.default_rng(seed)
    configs = [sample_config(space, rng) for _ in range(budget)]

    def evaluate(idx_cfg):
        idx, cfg = idx_cfg
        try:
            return SweepEntry(index=idx, config=cfg, summary=objective(cfg))
        except DivergenceError as exc:
            logger.warning("config %d diverged: %s", idx, exc)
            return SweepEntry(index=idx, config=cfg, summary=None, error=str(exc))

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            leaderboard = list(pool.map(evaluate, enumerate(configs)))
    else:
        leaderboard = [evaluate(item) for item in enumerate(configs)]
    scored = [e for e in leaderboard if e.summary is not None]
    if not scored:
        raise SweepError(
            f"all {budget} sampled configs diverged; "
            f"first failure: {leaderboard[0].error}"
        )
    best = max(scored, key=lambda e: (e.summary.mean, -e.index))
    return best.config, leaderboard


def build_model_config(model_kind: str, in_dim: int, out_dim: int, config: dict):
    """Instantiate an architecture from a sampled search configuration."""
    if model_kind == "mlp":
        return MlpConfig(in_dim=in_dim,
                         hidden_dims=(config["hidden_dim"],) * config["num_layers"],
                         out_dim=out_dim, dropout=config["dropout"])
    if model_kind == "gcn":
        return GcnConfig(in_dim=in_dim, hidden_dim=config["hidden_dim"],
                         out_dim=out_dim, num_layers=config["num_layers"],
                         dropout=config["dropout"])
    raise ParameterError(f"unknown model kind {model_kind!r}")


@dataclass(frozen=True)
class TuneSettings:
    """Knobs shared by every tuning call inside a study.

    ``max_epochs`` and ``patience`` are the global early-stopping policy;
    they are never part of the searched space.
    """

    budget: int = 30
    search_trials: int = 1
    final_trials: int = 5
    split_seed: int = 3
    search_seed: int = 4
    trial_base_seed: int = 100
    n_jobs: int = 1
    max_epochs: int = 2000
    patience: int = 100
    eval_every: int = 1
    standardize: bool = False
    node_per_class: int = 20
    node_val_count: int = 500
    space: SearchSpace = field(default_factory=SearchSpace)


def make_training_job(ds: GraphDataset, task: str, model_kind: str, config: dict,
                      split, settings: TuneSettings) -> Callable[[int], object]:
    """Bind a sampled config to a dataset/split; the job maps trial seed -> report."""
    out_dim = config["hidden_dim"] if task == "link" else ds.num_classes
    model_cfg = build_model_config(model_kind, ds.num_features, out_dim, config)

    def job(trial_seed: int):
        tc = TrainConfig(lr=config["lr"], weight_decay=config["weight_decay"],
                         dropout=config["dropout"], seed=trial_seed,
                         max_epochs=settings.max_epochs, patience=settings.patience,
                         eval_every=settings.eval_every, task=task,
                         standardize=settings.standardize)
        if task == "link":
            return train_link(model_cfg, ds, split, tc)
        return train_node(model_cfg, ds, split, tc)

    return job


def tune_and_evaluate(ds: GraphDataset, task: str, model_kind: str,
                      settings: TuneSettings):
    """Random-search a model on one dataset, then measure the best config.

    The split is fixed across configs and trials. The search scores each
    config by mean validation metric over ``search_trials`` runs; the
    returned summary re-runs the winner for ``final_trials`` and reports
    the test metric.
    """
    if task == "link":
        split = link_split(ds, LINK_SPLIT_RATIOS, settings.split_seed)
    elif task == "node":
        split = node_split(ds, settings.split_seed, per_class=settings.node_per_class,
                           val_count=settings.node_val_count)
    else:
        raise ParameterError(f"unknown task {task!r}")

    def objective(config: dict) -> MetricSummary:
        job = make_training_job(ds, task, model_kind, config, split, settings)
        return run_trials(job, settings.search_trials, settings.trial_base_seed,
                          metric="val")

    best_config, leaderboard = random_search(settings.space, settings.budget,
                                             objective, settings.search_seed,
                                             n_jobs=settings.n_jobs)
    final_job = make_training_job(ds, task, model_kind, best_config, split, settings)
    summary = run_trials(final_job, settings.final_trials, settings.trial_base_seed)
    return best_config, summary, leaderboard


@dataclass
class StudyPoint:
    x: float
    model: str
    summary: MetricSummary
    best_config: dict


@dataclass
class StudyReport:
    x_values: list
    points: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.x_values, self.x_values[1:])):
            raise ParameterError("study x-axis must be strictly increasing")


def increment_grid(cols: int, increment: int) -> list:
    """Feature counts increment, 2*increment, ... plus the full width."""
    if not 1 <= increment <= cols:
        raise ParameterError(f"increment must lie in [1, {cols}], got {increment}")
    grid = list(range(increment, cols + 1, increment))
    if grid[-1] != cols:
        grid.append(cols)
    return grid


def feature_study(ds: GraphDataset, increment: int, models: Sequence[str],
                  task: str, settings: TuneSettings) -> StudyReport:
    """Tune each model on prefix slices of growing width."""
    grid = increment_grid(ds.num_features, increment)
    points = []
    for n in grid:
        sliced = slice_features(ds, n)
        for model_kind in models:
            logger.info("feature study: n=%d model=%s", n, model_kind)
            best_config, summary, _ = tune_and_evaluate(sliced, task, model_kind, settings)
            points.append(StudyPoint(x=float(n), model=model_kind,
                                     summary=summary, best_config=best_config))
    meta = {"kind": "features", "dataset": ds.name, "task": task,
            "increment": increment, "budget": settings.budget,
            "search_trials": settings.search_trials,
            "final_trials": settings.final_trials,
            "split_seed": settings.split_seed, "search_seed": settings.search_seed,
            "trial_base_seed": settings.trial_base_seed}
    return StudyReport(x_values=[float(n) for n in grid], points=points, meta=meta)


def gamma_study(gammas: Sequence[float], models: Sequence[str],
                settings: TuneSettings, graph_seed: int = 0, root_seed: int = 2,
                feature_seed: int = 1) -> StudyReport:
    """Tune models on the parental-dependence family, one dataset per coupling value."""
    if not gammas:
        raise ParameterError("gamma list must be non-empty")
    gammas = sorted(float(g) for g in gammas)
    points = []
    for gamma in gammas:
        ds = make_ws1000_gamma(gamma, graph_seed=graph_seed, root_seed=root_seed,
                               feature_seed=feature_seed)
        for model_kind in models:
            logger.info("gamma study: gamma=%g model=%s", gamma, model_kind)
            best_config, summary, _ = tune_and_evaluate(ds, "link", model_kind, settings)
            points.append(StudyPoint(x=gamma, model=model_kind,
                                     summary=summary, best_config=best_config))
    meta = {"kind": "gamma", "task": "link", "budget": settings.budget,
            "search_trials": settings.search_trials,
            "final_trials": settings.final_trials,
            "graph_seed": graph_seed, "root_seed": root_seed,
            "feature_seed": feature_seed, "split_seed": settings.split_seed,
            "search_seed": settings.search_seed,
            "trial_base_seed": settings.trial_base_seed}
    return StudyReport(x_values=list(gammas), points=points, meta=meta)


def format_config(config: dict) -> str:
    return ";".join(f"{k}={config[k]!r}" for k in sorted(config))


def write_study_csv(report: StudyReport, path) -> None:
    """One row per (point, model); '#' lines carry the study provenance."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for key in sorted(report.meta):
            fh.write(f"# {key}={report.meta[key]}\n")
        fh.write("x,model,mean,std,n_trials,trials,best_config\n")
        for point in report.points:
            trials = "|".join(repr(v) for v in point.summary.values)
            fh.write(f"{point.x!r},{point.model},{point.summary.mean!r},"
                     f"{point.summary.std!r},{point.summary.n_trials},"
                     f"{trials},{format_config(point.best_config)}\n")

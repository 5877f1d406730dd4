"""Command-line entry point.

Subcommands wire the library into reproducible pipelines:

* ``synth``  — generate and serialize a synthetic dataset directory
* ``train``  — train one model on a dataset, optionally over several trials
* ``sweep``  — random hyperparameter search on one dataset
* ``study``  — feature-count or parental-coupling study (CSV output)
* ``report`` — render study CSVs as a text table and an SVG line plot

Every command writes a ``manifest.txt`` with the resolved configuration and
seeds. ``GNB_SEED`` provides the base seed when no explicit seed flags are
given. Exit codes: 0 success, 2 usage, 3 format, 4 numeric divergence, 5 I/O.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .data import import_external, link_split, load_dataset, node_split, read_key_value, save_dataset
from .errors import (DivergenceError, FormatError, GnbenchError, ParameterError,
                     SamplingError, SweepError)
from .plotting import write_line_plot
from .sweep import (LINK_SPLIT_RATIOS, SearchSpace, TuneSettings, feature_study,
                    format_config, gamma_study, make_training_job, tune_and_evaluate,
                    write_study_csv)
from .synth import make_ws1000, make_ws1000_gamma
from .train import MetricSummary, run_trials, write_report

logger = logging.getLogger(__name__)


def _base_seed() -> int:
    raw = os.environ.get("GNB_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(f"GNB_SEED must be an integer, got {raw!r}") from None


def _resolve_seed(flag_value, offset: int) -> int:
    return flag_value if flag_value is not None else _base_seed() + offset

# Offsets applied to GNB_SEED when a seed flag is omitted.
GRAPH_SEED_OFFSET = 0
FEATURE_SEED_OFFSET = 1
ROOT_SEED_OFFSET = 2
SPLIT_SEED_OFFSET = 3
SEARCH_SEED_OFFSET = 4
TRIAL_SEED_OFFSET = 100


def _write_manifest(out_dir: Path, command: str, resolved: dict, outputs: list,
                    started: float) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.txt", "w", newline="\n") as fh:
        fh.write(f"command={command}\n")
        fh.write(f"version={__version__}\n")
        for key in sorted(resolved):
            fh.write(f"{key}={resolved[key]}\n")
        for path in outputs:
            fh.write(f"output={path}\n")
        fh.write(f"wall_time_s={time.perf_counter() - started:.3f}\n")


def _load_data_arg(args):
    if args.data is None:
        raise ParameterError("--data is required for this command")
    data_dir = Path(args.data)
    if data_dir.is_dir():
        return load_dataset(data_dir)
    raise FormatError(f"{data_dir}: not a dataset directory")


def _space_from_plan(plan: dict) -> SearchSpace:
    kwargs = {}
    if "lr_min" in plan or "lr_max" in plan:
        kwargs["lr_range"] = (float(plan.get("lr_min", 1e-4)), float(plan.get("lr_max", 1e-1)))
    if "wd_min" in plan or "wd_max" in plan:
        kwargs["weight_decay_range"] = (float(plan.get("wd_min", 1e-6)),
                                        float(plan.get("wd_max", 1e-2)))
    if "wd_zero_prob" in plan:
        kwargs["weight_decay_zero_prob"] = float(plan["wd_zero_prob"])
    if "dropout_min" in plan or "dropout_max" in plan:
        kwargs["dropout_range"] = (float(plan.get("dropout_min", 0.0)),
                                   float(plan.get("dropout_max", 0.7)))
    if "hidden_dims" in plan:
        kwargs["hidden_dims"] = tuple(int(v) for v in plan["hidden_dims"].split(","))
    if "num_layers" in plan:
        kwargs["num_layers"] = tuple(int(v) for v in plan["num_layers"].split(","))
    return SearchSpace(**kwargs)


def _tune_settings(args, plan: dict) -> TuneSettings:
    return TuneSettings(
        budget=int(plan.get("budget", args.budget)),
        search_trials=int(plan.get("search_trials", args.search_trials)),
        final_trials=int(plan.get("trials", args.trials)),
        split_seed=_resolve_seed(args.split_seed, SPLIT_SEED_OFFSET),
        search_seed=_resolve_seed(args.search_seed, SEARCH_SEED_OFFSET),
        trial_base_seed=_resolve_seed(args.seed, TRIAL_SEED_OFFSET),
        n_jobs=args.jobs,
        max_epochs=int(plan.get("max_epochs", args.max_epochs)),
        patience=int(plan.get("patience", args.patience)),
        eval_every=args.eval_every,
        standardize=args.standardize,
        node_per_class=args.per_class,
        node_val_count=args.val_count,
        space=_space_from_plan(plan),
    )


def _summary_csv_rows(path: Path, rows: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("x,model,mean,std,n_trials,trials,best_config\n")
        for x, model, summary, config in rows:
            trials = "|".join(repr(v) for v in summary.values)
            fh.write(f"{x},{model},{summary.mean!r},{summary.std!r},"
                     f"{summary.n_trials},{trials},{format_config(config)}\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_synth(args) -> int:
    started = time.perf_counter()
    out_dir = Path(args.out)
    graph_seed = _resolve_seed(args.graph_seed, GRAPH_SEED_OFFSET)
    feature_seed = _resolve_seed(args.feature_seed, FEATURE_SEED_OFFSET)
    resolved = {"family": args.family, "graph_seed": graph_seed,
                "feature_seed": feature_seed}
    if args.family == "ws1000":
        ds = make_ws1000(graph_seed, feature_seed)
    else:
        if args.gamma is None:
            raise ParameterError("--gamma is required for the ws1000-gamma family")
        root_seed = _resolve_seed(args.root_seed, ROOT_SEED_OFFSET)
        resolved.update(gamma=args.gamma, nu=1.0, root_seed=root_seed)
        ds = make_ws1000_gamma(args.gamma, graph_seed=graph_seed,
                               root_seed=root_seed, feature_seed=feature_seed)
    save_dataset(ds, out_dir)
    outputs = [out_dir / "edges.csv", out_dir / "features.gft", out_dir / "meta.txt"]
    _write_manifest(out_dir, "synth", resolved, outputs, started)
    print(f"wrote {ds.name}: {ds.graph.num_nodes} nodes, {ds.graph.num_edges} edges, "
          f"{ds.num_features} features -> {out_dir}")
    return 0


def cmd_import(args) -> int:
    started = time.perf_counter()
    out_dir = Path(args.out)
    ds = import_external(args.edges, args.features, args.labels, name=args.name)
    save_dataset(ds, out_dir)
    _write_manifest(out_dir, "import",
                    {"edges": args.edges, "features": args.features,
                     "labels": args.labels or ""},
                    [out_dir / "edges.csv", out_dir / "features.gft"], started)
    print(f"imported {ds.name}: {ds.graph.num_nodes} nodes, {ds.graph.num_edges} edges")
    return 0


def cmd_train(args) -> int:
    started = time.perf_counter()
    out_dir = Path(args.out)
    ds = _load_data_arg(args)
    plan = read_key_value(args.plan) if args.plan else {}
    config = {
        "lr": float(plan.get("lr", args.lr)),
        "weight_decay": float(plan.get("weight_decay", args.weight_decay)),
        "dropout": float(plan.get("dropout", args.dropout)),
        "hidden_dim": int(plan.get("hidden_dim", args.hidden_dim)),
        "num_layers": int(plan.get("num_layers", args.num_layers)),
    }
    settings = TuneSettings(
        split_seed=_resolve_seed(args.split_seed, SPLIT_SEED_OFFSET),
        trial_base_seed=_resolve_seed(args.seed, TRIAL_SEED_OFFSET),
        max_epochs=args.max_epochs, patience=args.patience,
        eval_every=args.eval_every, standardize=args.standardize,
        node_per_class=args.per_class, node_val_count=args.val_count,
    )
    def split_for(seed: int):
        if args.task == "link":
            return link_split(ds, LINK_SPLIT_RATIOS, seed)
        return node_split(ds, seed, per_class=settings.node_per_class,
                          val_count=settings.node_val_count)

    if args.resplit_per_trial:
        reports = []
        for t in range(args.trials):
            job = make_training_job(ds, args.task, args.model, config,
                                    split_for(settings.split_seed + t), settings)
            reports.append(job(settings.trial_base_seed + t))
    else:
        job = make_training_job(ds, args.task, args.model, config,
                                split_for(settings.split_seed), settings)
        reports = [job(settings.trial_base_seed + t) for t in range(args.trials)]
    summary = MetricSummary.from_values([r.test_metric_at_best_val for r in reports])
    metric_name = "test_roc_auc" if args.task == "link" else "test_accuracy"
    out_dir.mkdir(parents=True, exist_ok=True)
    for t, report in enumerate(reports):
        trial_dir = out_dir / f"trial_{t}"
        write_report(report, trial_dir)
        with open(trial_dir / "report.txt", "a", newline="\n") as fh:
            fh.write(f"{metric_name}={report.test_metric_at_best_val!r}\n")
    _summary_csv_rows(out_dir / "summary.csv",
                      [(0, args.model, summary, config)])
    resolved = dict(config, model=args.model, task=args.task, data=args.data,
                    trials=args.trials, split_seed=settings.split_seed,
                    trial_base_seed=settings.trial_base_seed,
                    resplit_per_trial=args.resplit_per_trial)
    if args.task == "link":
        resolved["split_ratios"] = "/".join(str(r) for r in LINK_SPLIT_RATIOS)
    _write_manifest(out_dir, "train", resolved,
                    [out_dir / "summary.csv"], started)
    print(f"{args.model} {args.task} {metric_name}: mean={summary.mean:.4f} "
          f"std={summary.std:.4f} over {summary.n_trials} trial(s)")
    return 0


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    out_dir = Path(args.out)
    ds = _load_data_arg(args)
    plan = read_key_value(args.plan) if args.plan else {}
    settings = _tune_settings(args, plan)
    best_config, summary, leaderboard = tune_and_evaluate(ds, args.task, args.model,
                                                          settings)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "leaderboard.csv", "w", newline="\n") as fh:
        fh.write("index,val_mean,val_std,n_trials,error,config\n")
        for entry in leaderboard:
            if entry.summary is None:
                fh.write(f"{entry.index},,,0,{entry.error},{format_config(entry.config)}\n")
            else:
                fh.write(f"{entry.index},{entry.summary.mean!r},{entry.summary.std!r},"
                         f"{entry.summary.n_trials},,{format_config(entry.config)}\n")
    with open(out_dir / "best_config.txt", "w", newline="\n") as fh:
        for key in sorted(best_config):
            fh.write(f"{key}={best_config[key]!r}\n")
    _summary_csv_rows(out_dir / "summary.csv", [(0, args.model, summary, best_config)])
    resolved = dict(model=args.model, task=args.task, data=args.data,
                    budget=settings.budget, search_trials=settings.search_trials,
                    trials=settings.final_trials, split_seed=settings.split_seed,
                    search_seed=settings.search_seed,
                    trial_base_seed=settings.trial_base_seed)
    if args.task == "link":
        resolved["split_ratios"] = "/".join(str(r) for r in LINK_SPLIT_RATIOS)
    _write_manifest(out_dir, "sweep", resolved,
                    [out_dir / "leaderboard.csv", out_dir / "summary.csv"], started)
    print(f"best config: {format_config(best_config)}")
    print(f"test metric: mean={summary.mean:.4f} std={summary.std:.4f}")
    return 0


def cmd_study(args) -> int:
    started = time.perf_counter()
    out_dir = Path(args.out)
    plan = read_key_value(args.plan) if args.plan else {}
    settings = _tune_settings(args, plan)
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    if args.kind == "features":
        ds = _load_data_arg(args)
        report = feature_study(ds, args.increment, models, args.task, settings)
    else:
        gammas = [float(g) for g in args.gammas.split(",") if g.strip()]
        report = gamma_study(
            gammas, models, settings,
            graph_seed=_resolve_seed(args.graph_seed, GRAPH_SEED_OFFSET),
            root_seed=_resolve_seed(args.root_seed, ROOT_SEED_OFFSET),
            feature_seed=_resolve_seed(args.feature_seed, FEATURE_SEED_OFFSET),
        )
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "study.csv"
    write_study_csv(report, csv_path)
    resolved = dict(kind=args.kind, models=args.models, budget=settings.budget,
                    trials=settings.final_trials,
                    search_trials=settings.search_trials)
    resolved.update({k: v for k, v in report.meta.items()})
    _write_manifest(out_dir, "study", resolved, [csv_path], started)
    print(f"study complete: {len(report.points)} point(s) -> {csv_path}")
    return 0


def _read_report_csv(path: Path):
    meta = {}
    rows = []
    with open(path, newline="") as fh:
        header = None
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            record = next(csv.reader([line]))
            if header is None:
                header = record
                required = {"x", "model", "mean", "std"}
                if not required.issubset(header):
                    raise FormatError(f"{path}: missing columns {required - set(header)}")
                continue
            if len(record) != len(header):
                raise FormatError(f"{path}: row has {len(record)} fields, "
                                  f"header has {len(header)}")
            row = dict(zip(header, record))
            try:
                row["x"] = float(row["x"])
                row["mean"] = float(row["mean"])
                row["std"] = float(row["std"])
            except ValueError:
                raise FormatError(f"{path}: non-numeric x/mean/std in row "
                                  f"{row.get('model', '?')}") from None
            rows.append(row)
    if header is None:
        raise FormatError(f"{path}: empty report")
    return meta, rows


def cmd_report(args) -> int:
    started = time.perf_counter()
    out_dir = Path(args.out)
    all_rows = []
    for input_path in args.inputs:
        _, rows = _read_report_csv(Path(input_path))
        all_rows.extend(rows)
    if not all_rows:
        raise FormatError("no data rows in the provided CSVs")
    out_dir.mkdir(parents=True, exist_ok=True)
    name_w = max(len(r["model"]) for r in all_rows)
    lines = [f"{'Model':<{name_w}}  {'x':>10}  {'metric':>16}"]
    for row in all_rows:
        lines.append(f"{row['model']:<{name_w}}  {row['x']:>10.6g}  "
                     f"{row['mean']:>8.2f} +/- {row['std']:.2f}")
    table = "\n".join(lines) + "\n"
    (out_dir / "table.txt").write_text(table)
    sys.stdout.write(table)
    outputs = [out_dir / "table.txt"]
    if args.plot:
        series = {}
        for row in all_rows:
            xs, means, stds = series.setdefault(row["model"], ([], [], []))
            xs.append(row["x"])
            means.append(row["mean"])
            stds.append(row["std"])
        for name, (xs, means, stds) in series.items():
            order = sorted(range(len(xs)), key=lambda i: xs[i])
            series[name] = ([xs[i] for i in order], [means[i] for i in order],
                            [stds[i] for i in order])
        plot_path = out_dir / "plot.svg"
        write_line_plot(plot_path, series, x_label=args.x_label, y_label=args.y_label)
        outputs.append(plot_path)
    _write_manifest(out_dir, "report", {"inputs": ";".join(args.inputs)},
                    outputs, started)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common_seed_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help="trial base seed (default GNB_SEED+100)")
    p.add_argument("--split-seed", type=int, default=None,
                   help="split seed (default GNB_SEED+3)")


def _add_tune_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, default=30, help="configs to sample")
    p.add_argument("--search-trials", type=int, default=1,
                   help="trials per config during search")
    p.add_argument("--trials", type=int, default=5, help="trials at the best config")
    p.add_argument("--search-seed", type=int, default=None,
                   help="config sampling seed (default GNB_SEED+4)")
    p.add_argument("--plan", default=None, help="key=value plan file")
    p.add_argument("--jobs", type=int, default=1, help="worker bound for config evaluation")
    p.add_argument("--max-epochs", type=int, default=2000)
    p.add_argument("--patience", type=int, default=100)
    p.add_argument("--eval-every", type=int, default=1)
    p.add_argument("--standardize", action="store_true",
                   help="z-score feature columns before training")
    p.add_argument("--per-class", type=int, default=20,
                   help="node task: train nodes per class")
    p.add_argument("--val-count", type=int, default=500,
                   help="node task: validation node count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gnbench",
        description="Synthetic small-world graph benchmarks and tuning studies.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset directory")
    p.add_argument("--family", choices=("ws1000", "ws1000-gamma"), required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--graph-seed", type=int, default=None)
    p.add_argument("--feature-seed", type=int, default=None)
    p.add_argument("--root-seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("import", help="import loose edge/feature/label files")
    p.add_argument("--edges", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--name", default="")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("train", help="train one model with fixed hyperparameters")
    p.add_argument("--model", choices=("mlp", "gcn"), required=True)
    p.add_argument("--task", choices=("link", "node"), required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--hidden-dim", type=int, default=64)
    p.add_argument("--num-layers", type=int, default=2)
    p.add_argument("--plan", default=None)
    p.add_argument("--max-epochs", type=int, default=2000)
    p.add_argument("--patience", type=int, default=100)
    p.add_argument("--eval-every", type=int, default=1)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--resplit-per-trial", action="store_true",
                   help="draw a fresh split per trial instead of re-initializing only")
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--val-count", type=int, default=500)
    _add_common_seed_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="random hyperparameter search")
    p.add_argument("--model", choices=("mlp", "gcn"), required=True)
    p.add_argument("--task", choices=("link", "node"), required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_tune_flags(p)
    _add_common_seed_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("study", help="feature-count or coupling study")
    p.add_argument("--kind", choices=("features", "gamma"), required=True)
    p.add_argument("--data", default=None, help="dataset dir (features study)")
    p.add_argument("--increment", type=int, default=100)
    p.add_argument("--gammas", default="0.2,0.4,0.6,0.8,1.0")
    p.add_argument("--models", default="mlp,gcn")
    p.add_argument("--task", choices=("link", "node"), default="link")
    p.add_argument("--graph-seed", type=int, default=None)
    p.add_argument("--feature-seed", type=int, default=None)
    p.add_argument("--root-seed", type=int, default=None)
    p.add_argument("--out", required=True)
    _add_tune_flags(p)
    _add_common_seed_flags(p)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("report", help="render report CSVs as table and plot")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")
    p.add_argument("--x-label", default="x")
    p.add_argument("--y-label", default="metric")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DivergenceError, SweepError, SamplingError) as exc:
        print(f"error (numeric): {exc}", file=sys.stderr)
        return 4
    except FormatError as exc:
        print(f"error (format): {exc}", file=sys.stderr)
        return 3
    except (ParameterError, GnbenchError) as exc:
        print(f"error (usage): {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error (io): {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())

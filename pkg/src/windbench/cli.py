"""Command-line interface.

Subcommands: generate, prepare, train, search, evaluate, report, plot.
Exit codes: 0 success, 2 validation error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import timeutil
from .config import WorkbenchConfig, derive_seed, load_config
from .errors import ValidationError, WindbenchError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="YAML config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--workers", type=int, default=1, help="worker pool size")
    parser.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="windbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("generate", "generate the synthetic dataset and write it to <out>/dataset"),
        ("prepare", "build region crops and report their hull geometry"),
        ("search", "run the evolutionary architecture search"),
        ("evaluate", "run the full benchmark: train, forecast, report, plot"),
    ):
        p = sub.add_parser(name, help=help_text)
        _common_flags(p)

    p = sub.add_parser("train", help="train one baseline on every region")
    _common_flags(p)
    p.add_argument("--model", required=True, help="model kind to train")

    p = sub.add_parser("report", help="re-render the text table from <out>/report.csv")
    p.add_argument("--out", default="out")

    p = sub.add_parser("plot", help="re-render the weekly plot from stored forecasts")
    _common_flags(p)
    p.add_argument("--week", default=None, help="week start date YYYY-MM-DD")
    return parser


def _cmd_generate(cfg: WorkbenchConfig, args) -> int:
    from .formats import save_dataset
    from .synthgen import generate_benchmark

    dataset = generate_benchmark(cfg.benchmark)
    target = Path(args.out) / "dataset"
    save_dataset(dataset, target)
    print(f"dataset: {dataset.maps.steps} hourly steps, "
          f"{dataset.maps.rows}x{dataset.maps.cols} grid, "
          f"{len(dataset.regions)} regions -> {target}")
    return EXIT_OK


def _cmd_prepare(cfg: WorkbenchConfig, args) -> int:
    from .baselines import build_region_data
    from .plots import render_region_geometry
    from .report import ensure_dataset

    dataset = ensure_dataset(cfg, Path(args.out))
    out = Path(args.out) / "prep"
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for rid in dataset.region_ids:
        data = build_region_data(dataset, rid, cfg.buffer_cells)
        reports.append(data.crop.geometry_report())
        render_region_geometry(data.crop, out / f"region_{rid}.png")
    text = ("\n\n".join(reports)) + "\n"
    (out / "crops.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    print(f"geometry figures -> {out}")
    return EXIT_OK


def _cmd_train(cfg: WorkbenchConfig, args) -> int:
    from .baselines import (
        build_attention_spec,
        build_conv_spec,
        fit_mean_tree,
        save_checkpoint,
        train_map_regressor,
        validation_mae_mw,
    )
    from .baselines.specs import TrainConfig
    from .report import ensure_dataset, prepare_regions

    kind = args.model
    if kind not in ("mean_tree", "conv_net", "patch_attention"):
        raise ValidationError(
            f"train supports mean_tree, conv_net, patch_attention; got {kind!r} "
            "(dragon models come from `search`)"
        )
    dataset = ensure_dataset(cfg, Path(args.out))
    prepared = prepare_regions(cfg, dataset)
    out = Path(args.out) / "models"
    out.mkdir(parents=True, exist_ok=True)
    for rid in sorted(prepared):
        data = prepared[rid].train
        seed = derive_seed(cfg.seed, kind, rid)
        tc = TrainConfig(
            epochs=cfg.train.epochs, batch_size=cfg.train.batch_size,
            learning_rate=cfg.train.learning_rate, seed=seed,
            early_stop_patience=cfg.train.early_stop_patience,
            val_fraction=cfg.train.val_fraction,
        )
        if kind == "mean_tree":
            model = fit_mean_tree(
                data.mean_features(), data.scaled, rid, data.capacity_series, seed=seed
            )
        elif kind == "conv_net":
            model = build_conv_spec(data, tc, cfg.conv_grid).best_model
        else:
            spec = build_attention_spec(data.input_dims, **cfg.attention)
            model = train_map_regressor(
                spec, data.maps, data.scaled, tc,
                region_id=rid, capacity_series=data.capacity_series,
            )
        score = validation_mae_mw(model, data, cfg.train.val_fraction)
        save_checkpoint(model, out / f"{kind}_{rid}.npz")
        print(f"{kind} {rid}: validation MAE {score:.3f} MW")
    return EXIT_OK


def _cmd_search(cfg: WorkbenchConfig, args) -> int:
    from .baselines.specs import TrainConfig
    from .baselines.gridsearch import build_conv_spec
    from .report import ensure_dataset, prepare_regions, run_search

    dataset = ensure_dataset(cfg, Path(args.out))
    prepared = prepare_regions(cfg, dataset)
    baseline_losses = {}
    for rid in sorted(prepared):
        tc = TrainConfig(
            epochs=cfg.train.epochs, batch_size=cfg.train.batch_size,
            learning_rate=cfg.train.learning_rate,
            seed=derive_seed(cfg.seed, "conv_net", rid),
            early_stop_patience=cfg.train.early_stop_patience,
            val_fraction=cfg.train.val_fraction,
        )
        result = build_conv_spec(prepared[rid].train, tc, cfg.conv_grid)
        baseline_losses[rid] = result.best_val_mae_mw
        print(f"conv baseline {rid}: validation MAE {result.best_val_mae_mw:.3f} MW")
    result = run_search(cfg, prepared, baseline_losses, Path(args.out), workers=args.workers)
    for rid in sorted(result.best):
        entry = result.best[rid]
        print(f"best {rid}: raw {entry.raw_loss:.3f} MW, normalized {entry.norm_loss:.4f}")
    print(f"search artifacts -> {Path(args.out) / 'search'}")
    return EXIT_OK


def _cmd_evaluate(cfg: WorkbenchConfig, args) -> int:
    from .report import render_report_text, run_benchmark

    report = run_benchmark(cfg, args.out, workers=args.workers, progress=print)
    print(render_report_text(report), end="")
    if not report.ok:
        print("completed with failures; see report.txt", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_report(args) -> int:
    from .report import load_report_csv, render_report_text

    path = Path(args.out) / "report.csv"
    report = load_report_csv(path)
    text = render_report_text(report)
    (Path(args.out) / "report.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def _cmd_plot(cfg: WorkbenchConfig, args) -> int:
    from .formats import read_power_csv
    from .plots import default_week_start, render_weekly_plot
    from .report import model_order

    fdir = Path(args.out) / "forecasts"
    truth_path = fdir / "truth_national.csv"
    if not truth_path.exists():
        raise ValidationError(f"{truth_path} missing; run `evaluate` first")
    truth = read_power_csv(truth_path)
    forecasts = {}
    for kind in model_order(cfg.models):
        path = fdir / f"{kind}_national.csv"
        if path.exists():
            forecasts[kind] = read_power_csv(path)
    if args.week:
        year, month, day = (int(p) for p in args.week.split("-"))
        week_start = timeutil.date_to_hour(year, month, day)
    else:
        week_start = default_week_start(truth.start_hour, truth.end_hour)
    pdir = Path(args.out) / "plots"
    pdir.mkdir(parents=True, exist_ok=True)
    stamp = timeutil.hour_to_datetime(week_start).date().isoformat()
    render_weekly_plot(
        truth, forecasts, week_start,
        pdir / f"week_{stamp}.png", pdir / f"week_{stamp}.csv",
    )
    print(f"weekly plot -> {pdir / f'week_{stamp}.png'}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            return _cmd_report(args)
        cfg = load_config(args.config, seed_override=args.seed)
        if args.command == "generate":
            return _cmd_generate(cfg, args)
        if args.command == "prepare":
            return _cmd_prepare(cfg, args)
        if args.command == "train":
            return _cmd_train(cfg, args)
        if args.command == "search":
            return _cmd_search(cfg, args)
        if args.command == "evaluate":
            return _cmd_evaluate(cfg, args)
        if args.command == "plot":
            return _cmd_plot(cfg, args)
        raise ValidationError(f"unknown command {args.command!r}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except WindbenchError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

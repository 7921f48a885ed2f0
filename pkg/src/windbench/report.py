"""Benchmark orchestration: train, forecast, aggregate, report, plot.

The national row of every table is computed from the summed national series
(bottom-up aggregation), never by averaging regional scores. Metrics pool
the full test period; the map regressors see the hourly map for each target
hour (the lead time only selects which forecast run that map came from), so
pooling over lead times 1..6 matches the operational cadence in which
persistence competes from the same run times.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import timeutil
from .baselines import (
    RegionData,
    TrainConfig,
    build_attention_spec,
    build_conv_spec,
    build_region_data,
    fit_mean_tree,
    persistence_from_runs,
    save_checkpoint,
    train_map_regressor,
    validation_mae_mw,
)
from .baselines.training import predict_power
from .config import WorkbenchConfig, derive_seed
from .dragon import SearchSpace, arch_hash, arch_to_text
from .errors import ValidationError, WindbenchError
from .evo import SearchConfig, make_training_evaluator, steady_state_search
from .formats import load_dataset, save_dataset, write_power_csv
from .metrics import aggregate_national, mae, nmae
from .plots import default_week_start, render_weekly_plot
from .prep import chronological_split
from .synthgen import generate_benchmark
from .types import Dataset, ForecastRunIndex, PowerSeries

# Matches the paper-style column order: searched model first, then the
# map baselines, then the aggregate/naive references.
CANONICAL_MODEL_ORDER = ("dragon", "conv_net", "patch_attention", "mean_tree", "persistence")
NATIONAL = "national"
REPORT_CSV_HEADER = "model,region,mae_mw,nmae_pct"


@dataclass(frozen=True)
class ReportRow:
    model: str
    region: str
    mae_mw: float
    nmae_pct: float


@dataclass
class EvaluationReport:
    rows: list[ReportRow]
    metadata: dict
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def cell(self, model: str, region: str) -> ReportRow:
        for row in self.rows:
            if row.model == model and row.region == region:
                return row
        raise KeyError(f"no report cell for ({model}, {region})")

    def to_csv(self) -> str:
        lines = [REPORT_CSV_HEADER]
        for row in self.rows:
            lines.append(
                f"{row.model},{row.region},{row.mae_mw:.3f},{row.nmae_pct:.3f}"
            )
        return "\n".join(lines) + "\n"


def model_order(models) -> list[str]:
    return [m for m in CANONICAL_MODEL_ORDER if m in models]


def ensure_dataset(cfg: WorkbenchConfig, out_dir: Path | None = None) -> Dataset:
    """Load the configured dataset directory or generate (and cache) one."""
    if cfg.dataset_dir:
        return load_dataset(cfg.dataset_dir)
    if out_dir is not None:
        cached = Path(out_dir) / "dataset"
        if (cached / "dataset.json").exists():
            return load_dataset(cached)
        dataset = generate_benchmark(cfg.benchmark)
        save_dataset(dataset, cached)
        return dataset
    return generate_benchmark(cfg.benchmark)


@dataclass
class PreparedRegion:
    train: RegionData
    test: RegionData


def prepare_regions(cfg: WorkbenchConfig, dataset: Dataset) -> dict[str, PreparedRegion]:
    train_ds, test_ds = chronological_split(dataset, cfg.train_years, cfg.test_years)
    prepared = {}
    for rid in dataset.region_ids:
        prepared[rid] = PreparedRegion(
            train=build_region_data(train_ds, rid, cfg.buffer_cells),
            test=build_region_data(test_ds, rid, cfg.buffer_cells),
        )
    return prepared


def run_search(
    cfg: WorkbenchConfig,
    prepared: dict[str, PreparedRegion],
    baseline_losses: dict[str, float],
    out_dir: Path,
    workers: int = 1,
):
    """Evolutionary search over all regions; writes log and best-model files."""
    search_dir = Path(out_dir) / "search"
    (search_dir / "architectures").mkdir(parents=True, exist_ok=True)
    (search_dir / "checkpoints").mkdir(parents=True, exist_ok=True)
    regions = tuple(sorted(prepared))
    dims = {prepared[r].train.input_dims for r in regions}
    space = SearchSpace(probe_dims=tuple(sorted(dims)))
    search_cfg = SearchConfig(
        population_size=cfg.search.population,
        budget=cfg.search.budget,
        regions=regions,
        baseline_losses=baseline_losses,
        space=space,
        worker_count=workers,
        rng_seed=derive_seed(cfg.seed, "search"),
    )
    evaluator = make_training_evaluator(
        {r: prepared[r].train for r in regions},
        epochs=cfg.search.epochs,
        early_stop_patience=cfg.search.early_stop_patience,
        val_fraction=cfg.train.val_fraction,
    )
    result = steady_state_search(search_cfg, evaluator, log_path=search_dir / "search_log.csv")

    best_lines = ["region,eval_index,arch_hash,raw_loss_mw,norm_loss"]
    for region in regions:
        entry = result.best.get(region)
        if entry is None:
            continue
        best_lines.append(
            f"{region},{entry.eval_index},{arch_hash(entry.arch)},"
            f"{repr(entry.raw_loss)},{repr(entry.norm_loss)}"
        )
        (search_dir / "architectures" / f"{region}.txt").write_text(
            arch_to_text(entry.arch), encoding="utf-8"
        )
        if entry.payload is not None:
            save_checkpoint(entry.payload, search_dir / "checkpoints" / f"{region}.npz")
    (search_dir / "best_per_region.csv").write_text(
        "\n".join(best_lines) + "\n", encoding="utf-8"
    )
    return result


def _region_forecasts(
    cfg: WorkbenchConfig,
    kind: str,
    prepared: dict[str, PreparedRegion],
    dataset: Dataset,
    out_dir: Path,
    workers: int,
    shared: dict,
) -> dict[str, PowerSeries]:
    """Test-period MW forecasts per region for one model kind."""
    run_index = ForecastRunIndex()
    forecasts: dict[str, PowerSeries] = {}
    if kind == "persistence":
        for rid, pr in prepared.items():
            observed = dataset.power[rid]  # runs at the test boundary read train-period power
            forecasts[rid] = persistence_from_runs(observed, pr.test.hours, run_index)
        return forecasts

    if kind == "mean_tree":
        for rid, pr in prepared.items():
            model = fit_mean_tree(
                pr.train.mean_features(),
                pr.train.scaled,
                rid,
                pr.train.capacity_series,
                seed=derive_seed(cfg.seed, "mean_tree", rid),
            )
            shared.setdefault("models", {})[("mean_tree", rid)] = model
            forecasts[rid] = predict_power(model, pr.test.mean_features(), pr.test.hours)
        return forecasts

    if kind == "conv_net":
        baseline_losses = {}
        for rid, pr in prepared.items():
            cfg_region = TrainConfig(
                epochs=cfg.train.epochs,
                batch_size=cfg.train.batch_size,
                learning_rate=cfg.train.learning_rate,
                seed=derive_seed(cfg.seed, "conv_net", rid),
                early_stop_patience=cfg.train.early_stop_patience,
                val_fraction=cfg.train.val_fraction,
            )
            grid_result = build_conv_spec(pr.train, cfg_region, cfg.conv_grid)
            model = grid_result.best_model
            baseline_losses[rid] = grid_result.best_val_mae_mw
            shared.setdefault("models", {})[("conv_net", rid)] = model
            shared.setdefault("grid_tables", {})[rid] = grid_result.table
            forecasts[rid] = predict_power(model, pr.test.maps, pr.test.hours)
        shared["baseline_losses"] = baseline_losses
        return forecasts

    if kind == "patch_attention":
        for rid, pr in prepared.items():
            spec = build_attention_spec(pr.train.input_dims, **cfg.attention)
            cfg_region = TrainConfig(
                epochs=cfg.train.epochs,
                batch_size=cfg.train.batch_size,
                learning_rate=cfg.train.learning_rate,
                seed=derive_seed(cfg.seed, "patch_attention", rid),
                early_stop_patience=cfg.train.early_stop_patience,
                val_fraction=cfg.train.val_fraction,
            )
            model = train_map_regressor(
                spec, pr.train.maps, pr.train.scaled, cfg_region,
                region_id=rid, capacity_series=pr.train.capacity_series,
            )
            shared.setdefault("models", {})[("patch_attention", rid)] = model
            forecasts[rid] = predict_power(model, pr.test.maps, pr.test.hours)
        return forecasts

    if kind == "dragon":
        baseline_losses = shared.get("baseline_losses")
        if not baseline_losses:
            raise ValidationError("dragon requires conv_net baseline losses")
        result = run_search(cfg, prepared, baseline_losses, out_dir, workers)
        shared["search_result"] = result
        for rid, pr in prepared.items():
            entry = result.best.get(rid)
            if entry is None or entry.payload is None:
                raise WindbenchError(f"search produced no model for region {rid}")
            forecasts[rid] = predict_power(entry.payload, pr.test.maps, pr.test.hours)
        return forecasts

    raise ValidationError(f"unknown model kind {kind!r}")


def run_benchmark(
    cfg: WorkbenchConfig,
    out_dir: str | Path,
    workers: int = 1,
    progress=None,
) -> EvaluationReport:
    """Full pipeline over every configured model; writes all artifacts.

    Stage failures are annotated and skipped so the report still covers the
    models that succeeded; `report.ok` tells the CLI to exit nonzero.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    say = progress or (lambda msg: None)
    started = time.time()

    dataset = ensure_dataset(cfg, out)
    prepared = prepare_regions(cfg, dataset)
    region_ids = sorted(prepared)
    say(f"prepared {len(region_ids)} regions; crops "
        + ", ".join(f"{r}:{prepared[r].train.input_dims}" for r in region_ids))

    kinds = model_order(cfg.models)
    ordered = [k for k in kinds if k != "dragon"] + (["dragon"] if "dragon" in kinds else [])
    shared: dict = {}
    forecasts: dict[str, dict[str, PowerSeries]] = {}
    failures: list[str] = []
    durations: dict[str, float] = {}
    for kind in ordered:
        t0 = time.time()
        try:
            forecasts[kind] = _region_forecasts(
                cfg, kind, prepared, dataset, out, workers, shared
            )
            durations[kind] = time.time() - t0
            say(f"{kind}: forecasts ready in {durations[kind]:.1f}s")
        except WindbenchError as exc:
            failures.append(f"{kind}: {exc}")
            say(f"{kind}: FAILED ({exc})")

    truth = {rid: prepared[rid].test.truth for rid in region_ids}
    national_truth = aggregate_national(truth)

    rows: list[ReportRow] = []
    for kind in kinds:
        if kind not in forecasts:
            continue
        for rid in region_ids:
            score = mae(truth[rid], forecasts[kind][rid])
            rows.append(
                ReportRow(kind, rid, score, nmae(score, float(truth[rid].power_mw.mean())))
            )
        national_forecast = aggregate_national(forecasts[kind])
        national_mae = mae(national_truth, national_forecast)
        # same code path as the regional cells, asserted for the report invariant
        assert national_mae == mae(aggregate_national(truth), aggregate_national(forecasts[kind]))
        rows.append(
            ReportRow(
                kind, NATIONAL, national_mae,
                nmae(national_mae, float(national_truth.power_mw.mean())),
            )
        )

    report = EvaluationReport(
        rows=rows,
        metadata={
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "regions": region_ids,
            "models": kinds,
            "train_years": list(cfg.train_years),
            "test_years": list(cfg.test_years),
            "durations_s": {k: round(v, 2) for k, v in durations.items()},
            "total_s": round(time.time() - started, 2),
            "baseline_losses": shared.get("baseline_losses", {}),
        },
        failures=failures,
    )
    _write_outputs(cfg, report, forecasts, truth, national_truth, out)
    return report


def _write_outputs(cfg, report, forecasts, truth, national_truth, out: Path) -> None:
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    (out / "report.txt").write_text(render_report_text(report), encoding="utf-8")

    fdir = out / "forecasts"
    fdir.mkdir(exist_ok=True)
    for kind, regional in forecasts.items():
        for rid, series in regional.items():
            write_power_csv(series, fdir / f"{kind}_{rid}.csv")
        write_power_csv(aggregate_national(regional), fdir / f"{kind}_national.csv")
    write_power_csv(national_truth, fdir / "truth_national.csv")
    for rid, series in truth.items():
        write_power_csv(series, fdir / f"truth_{rid}.csv")

    if cfg.report.per_horizon:
        (out / "report_horizons.csv").write_text(
            per_horizon_csv(forecasts, truth), encoding="utf-8"
        )

    if forecasts:
        pdir = out / "plots"
        pdir.mkdir(exist_ok=True)
        if cfg.report.week_start:
            year, month, day = (int(p) for p in cfg.report.week_start.split("-"))
            week_start = timeutil.date_to_hour(year, month, day)
        else:
            week_start = default_week_start(national_truth.start_hour, national_truth.end_hour)
        national = {kind: aggregate_national(regional) for kind, regional in forecasts.items()}
        stamp = timeutil.hour_to_datetime(week_start).date().isoformat()
        render_weekly_plot(
            national_truth, national, week_start,
            pdir / f"week_{stamp}.png", pdir / f"week_{stamp}.csv",
        )


def per_horizon_csv(forecasts, truth) -> str:
    """Optional breakdown: MAE per lead time implied by the 6-hour run cycle."""
    run_index = ForecastRunIndex()
    lines = ["model,region,horizon,mae_mw"]
    for kind in sorted(forecasts):
        for rid in sorted(forecasts[kind]):
            series = forecasts[kind][rid]
            leads = run_index.leads_for(series.hours)
            errors = np.abs(series.power_mw - truth[rid].power_mw)
            for h in sorted(set(int(x) for x in leads)):
                mask = leads == h
                lines.append(f"{kind},{rid},{h},{float(errors[mask].mean()):.3f}")
    return "\n".join(lines) + "\n"


def render_report_text(report: EvaluationReport) -> str:
    """Aligned table: regions as rows, model MAE/NMAE column pairs."""
    models = []
    regions = []
    for row in report.rows:
        if row.model not in models:
            models.append(row.model)
        if row.region not in regions:
            regions.append(row.region)
    regions = [r for r in regions if r != NATIONAL] + [NATIONAL]

    width = 22
    header1 = f"{'region':<24}" + "".join(f"{m:^{width}}" for m in models)
    header2 = f"{'':<24}" + "".join(f"{'MAE (MW)':>11}{'NMAE %':>{width - 11}}" for _ in models)
    lines = [header1, header2, "-" * len(header1)]
    for region in regions:
        cells = ""
        for model in models:
            try:
                row = report.cell(model, region)
                cells += f"{row.mae_mw:>11.3f}{row.nmae_pct:>{width - 11}.3f}"
            except KeyError:
                cells += f"{'-':>11}{'-':>{width - 11}}"
        lines.append(f"{region:<24}" + cells)
    lines.append("")
    for key, value in report.metadata.items():
        lines.append(f"# {key}: {value}")
    for failure in report.failures:
        lines.append(f"# FAILED: {failure}")
    return "\n".join(lines) + "\n"


def load_report_csv(path: str | Path) -> EvaluationReport:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != REPORT_CSV_HEADER:
        raise ValidationError(f"{path}: not a report CSV")
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        model, region, mae_mw, nmae_pct = line.split(",")
        rows.append(ReportRow(model, region, float(mae_mw), float(nmae_pct)))
    return EvaluationReport(rows=rows, metadata={})

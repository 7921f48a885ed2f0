"""Workbench configuration: one YAML file drives every CLI subcommand.

Top-level keys (all optional except `models` for evaluation runs):

    seed: 0                    master seed; the --seed flag overrides it
    dataset_dir: path          load an existing dataset instead of generating
    benchmark:                 synthetic dataset layout (see BenchmarkConfig)
      regions, farms_per_region, grid_rows, grid_cols, start_year, end_year,
      mean_speed, std_speed, spatial_smoothing_cells, temporal_ar1,
      cut_in, rated, cut_out, noise_std_mw,
      farm_capacity_min_mw, farm_capacity_max_mw
    split: {train_years: [...], test_years: [...]}
    prep: {buffer_cells: 2.0}
    models: [persistence, mean_tree, conv_net, patch_attention, dragon]
    train: {epochs, batch_size, learning_rate, early_stop_patience, val_fraction}
    conv_grid: {layers: [...], kernel: [...], channels: [...], activation: [...]}
    attention: {patch_size, embed_dim, heads, blocks}
    search: {population, budget, epochs, early_stop_patience}
    report: {per_horizon: false, week_start: "YYYY-MM-DD"}

Unknown keys are rejected so typos fail fast.
"""

from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .baselines.specs import MODEL_KINDS, TrainConfig
from .errors import ValidationError
from .synthgen import BenchmarkConfig, FieldParams, TurbineParams

_BENCH_KEYS = {
    "regions", "farms_per_region", "grid_rows", "grid_cols", "start_year",
    "end_year", "mean_speed", "std_speed", "spatial_smoothing_cells",
    "temporal_ar1", "cut_in", "rated", "cut_out", "noise_std_mw",
    "farm_capacity_min_mw", "farm_capacity_max_mw",
}


@dataclass(frozen=True)
class SearchSettings:
    population: int = 8
    budget: int = 60
    epochs: int = 12
    early_stop_patience: int = 3


@dataclass(frozen=True)
class ReportSettings:
    per_horizon: bool = False
    week_start: str | None = None


@dataclass(frozen=True)
class WorkbenchConfig:
    seed: int
    dataset_dir: str | None
    benchmark: BenchmarkConfig
    train_years: tuple[int, ...]
    test_years: tuple[int, ...]
    buffer_cells: float
    models: tuple[str, ...]
    train: TrainConfig
    conv_grid: dict[str, tuple]
    attention: dict[str, object]
    search: SearchSettings
    report: ReportSettings
    raw: dict = field(repr=False, default_factory=dict)

    def __post_init__(self):
        for kind in self.models:
            if kind not in MODEL_KINDS:
                raise ValidationError(f"unknown model kind {kind!r} in config")
        if not self.models:
            raise ValidationError("config lists zero models")
        if "dragon" in self.models and "conv_net" not in self.models:
            raise ValidationError(
                "the dragon search normalizes by conv_net losses; add conv_net "
                "to the model list"
            )

    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ValidationError(f"unknown {where} keys: {sorted(unknown)}")


def derive_seed(master: int, *tags: str) -> int:
    """Stable sub-seed for a named purpose (region, model, stage...)."""
    parts = [int(master)] + [zlib.crc32(t.encode("utf-8")) for t in tags]
    import numpy as np

    return int(np.random.SeedSequence(parts).generate_state(1)[0])


def load_config(path: str | Path, seed_override: int | None = None) -> WorkbenchConfig:
    try:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except FileNotFoundError:
        raise ValidationError(f"config file {path} not found") from None
    except yaml.YAMLError as exc:
        raise ValidationError(f"{path}: invalid YAML: {exc}") from None
    return parse_config(doc, seed_override=seed_override)


def parse_config(doc: dict, seed_override: int | None = None) -> WorkbenchConfig:
    if not isinstance(doc, dict):
        raise ValidationError("config root must be a mapping")
    _check_keys(
        doc,
        {"seed", "dataset_dir", "benchmark", "split", "prep", "models", "train",
         "conv_grid", "attention", "search", "report"},
        "config",
    )
    seed = int(doc.get("seed", 0)) if seed_override is None else int(seed_override)

    bench_doc = dict(doc.get("benchmark", {}))
    _check_keys(bench_doc, _BENCH_KEYS, "benchmark")
    field_params = FieldParams(
        mean_speed=float(bench_doc.get("mean_speed", 7.5)),
        std_speed=float(bench_doc.get("std_speed", 3.0)),
        spatial_smoothing_cells=float(bench_doc.get("spatial_smoothing_cells", 1.5)),
        temporal_ar1=float(bench_doc.get("temporal_ar1", 0.97)),
        rng_seed=derive_seed(seed, "field"),
    )
    turbine = TurbineParams(
        cut_in=float(bench_doc.get("cut_in", 3.0)),
        rated=float(bench_doc.get("rated", 12.0)),
        cut_out=float(bench_doc.get("cut_out", 25.0)),
    )
    benchmark = BenchmarkConfig(
        n_regions=int(bench_doc.get("regions", 4)),
        farms_per_region=int(bench_doc.get("farms_per_region", 3)),
        rows=int(bench_doc.get("grid_rows", 32)),
        cols=int(bench_doc.get("grid_cols", 32)),
        start_year=int(bench_doc.get("start_year", 2018)),
        end_year=int(bench_doc.get("end_year", 2020)),
        field=field_params,
        turbine=turbine,
        noise_std_mw=float(bench_doc.get("noise_std_mw", 0.5)),
        farm_capacity_range_mw=(
            float(bench_doc.get("farm_capacity_min_mw", 5.0)),
            float(bench_doc.get("farm_capacity_max_mw", 20.0)),
        ),
        seed=derive_seed(seed, "dataset"),
    )

    split_doc = dict(doc.get("split", {}))
    _check_keys(split_doc, {"train_years", "test_years"}, "split")
    train_years = tuple(int(y) for y in split_doc.get("train_years", (2018, 2019)))
    test_years = tuple(int(y) for y in split_doc.get("test_years", (2020,)))

    prep_doc = dict(doc.get("prep", {}))
    _check_keys(prep_doc, {"buffer_cells"}, "prep")

    train_doc = dict(doc.get("train", {}))
    _check_keys(
        train_doc,
        {"epochs", "batch_size", "learning_rate", "early_stop_patience", "val_fraction"},
        "train",
    )
    train = TrainConfig(
        epochs=int(train_doc.get("epochs", 30)),
        batch_size=int(train_doc.get("batch_size", 256)),
        learning_rate=float(train_doc.get("learning_rate", 1e-3)),
        seed=seed,
        early_stop_patience=int(train_doc.get("early_stop_patience", 4)),
        val_fraction=float(train_doc.get("val_fraction", 0.1)),
    )

    grid_doc = dict(doc.get("conv_grid", {}))
    _check_keys(grid_doc, {"layers", "kernel", "channels", "activation"}, "conv_grid")
    conv_grid = {
        "layers": tuple(grid_doc.get("layers", (2, 3))),
        "kernel": tuple(grid_doc.get("kernel", (3,))),
        "channels": tuple(grid_doc.get("channels", (8, 16))),
        "activation": tuple(grid_doc.get("activation", ("relu",))),
    }

    attn_doc = dict(doc.get("attention", {}))
    _check_keys(attn_doc, {"patch_size", "embed_dim", "heads", "blocks"}, "attention")
    attention = {
        "patch_size": int(attn_doc.get("patch_size", 4)),
        "embed_dim": int(attn_doc.get("embed_dim", 32)),
        "heads": int(attn_doc.get("heads", 2)),
        "blocks": int(attn_doc.get("blocks", 2)),
    }

    search_doc = dict(doc.get("search", {}))
    _check_keys(search_doc, {"population", "budget", "epochs", "early_stop_patience"}, "search")
    search = SearchSettings(
        population=int(search_doc.get("population", 8)),
        budget=int(search_doc.get("budget", 60)),
        epochs=int(search_doc.get("epochs", 12)),
        early_stop_patience=int(search_doc.get("early_stop_patience", 3)),
    )

    report_doc = dict(doc.get("report", {}))
    _check_keys(report_doc, {"per_horizon", "week_start"}, "report")
    report = ReportSettings(
        per_horizon=bool(report_doc.get("per_horizon", False)),
        week_start=report_doc.get("week_start"),
    )

    raw = dict(doc)
    raw["seed"] = seed
    return WorkbenchConfig(
        seed=seed,
        dataset_dir=doc.get("dataset_dir"),
        benchmark=benchmark,
        train_years=train_years,
        test_years=test_years,
        buffer_cells=float(prep_doc.get("buffer_cells", 2.0)),
        models=tuple(doc.get("models", ("persistence", "mean_tree", "conv_net"))),
        train=train,
        conv_grid=conv_grid,
        attention=attention,
        search=search,
        report=report,
        raw=raw,
    )

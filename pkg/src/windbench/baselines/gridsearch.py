"""Hyperparameter selection for the conv and patch-attention baselines."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

from ..errors import ValidationError
from .data import RegionData
from .specs import ModelSpec, TrainConfig, TrainedModel
from .training import train_map_regressor, validation_mae_mw

DEFAULT_CONV_GRID: dict[str, tuple] = {
    "layers": (2, 3, 4),
    "kernel": (3, 5),
    "channels": (8, 16, 32),
    "activation": ("relu", "gelu"),
}


def default_conv_grid() -> dict[str, tuple]:
    return dict(DEFAULT_CONV_GRID)


def enumerate_grid(grid: dict[str, tuple]) -> list[dict]:
    keys = sorted(grid)
    combos = []
    for values in itertools.product(*(grid[k] for k in keys)):
        combos.append(dict(zip(keys, values)))
    return combos


@dataclass(frozen=True)
class GridSearchResult:
    best_spec: ModelSpec
    best_val_mae_mw: float
    table: tuple[tuple[ModelSpec, float], ...]
    best_model: TrainedModel | None


def build_conv_spec(
    data: RegionData,
    cfg: TrainConfig,
    grid: dict[str, tuple] | None = None,
    evaluate: Callable[[ModelSpec], float] | None = None,
) -> GridSearchResult:
    """Exhaustive grid search, scored by MW MAE on the last-10% validation tail.

    Keeps the winning trained model alongside the full (spec, score) table.
    `evaluate` may replace the train-and-score step (used by tests); ties go
    to the earliest grid entry, so the result is deterministic.
    """
    grid = dict(grid) if grid is not None else default_conv_grid()
    combos = enumerate_grid(grid)
    if not combos:
        raise ValidationError("empty hyperparameter grid")
    table: list[tuple[ModelSpec, float]] = []
    best: tuple[ModelSpec, float, TrainedModel | None] | None = None
    for combo in combos:
        spec = ModelSpec("conv_net", combo, input_dims=data.input_dims)
        model = None
        if evaluate is not None:
            score = float(evaluate(spec))
        else:
            model = train_map_regressor(
                spec, data.maps, data.scaled, cfg,
                region_id=data.region_id, capacity_series=data.capacity_series,
            )
            score = validation_mae_mw(model, data, cfg.val_fraction)
        table.append((spec, score))
        if best is None or score < best[1]:
            best = (spec, score, model)
    return GridSearchResult(
        best_spec=best[0],
        best_val_mae_mw=best[1],
        table=tuple(table),
        best_model=best[2],
    )


def build_attention_spec(
    input_dims: tuple[int, int],
    patch_size: int = 4,
    embed_dim: int = 32,
    heads: int = 2,
    blocks: int = 2,
    mlp_ratio: float = 2.0,
) -> ModelSpec:
    """Fixed patch-attention spec; pads the crop to a patch-size multiple."""
    if patch_size < 1:
        raise ValidationError("patch_size must be positive")
    h, w = input_dims
    if patch_size > h or patch_size > w:
        raise ValidationError(f"patch {patch_size} larger than crop {h}x{w}")
    return ModelSpec(
        "patch_attention",
        {
            "patch_size": patch_size,
            "embed_dim": embed_dim,
            "heads": heads,
            "blocks": blocks,
            "mlp_ratio": mlp_ratio,
        },
        input_dims=input_dims,
    )

"""Two-step baseline: regional mean wind speed -> boosted-tree regressor."""

from __future__ import annotations

import numpy as np
from sklearn.ensemble import GradientBoostingRegressor

from ..errors import ValidationError
from ..prep import RegionCrop
from ..types import CapacityEntry
from .specs import ModelSpec, TrainedModel

MIN_TRAIN_PAIRS = 100

DEFAULT_TREE_PARAMS = {
    "n_estimators": 200,
    "max_depth": 3,
    "learning_rate": 0.1,
    "min_samples_leaf": 5,
}


def regional_mean_feature(crop: RegionCrop) -> np.ndarray:
    """Mean wind speed over the hull-mask cells, per time step."""
    if not crop.mask.any():
        raise ValidationError(f"region {crop.region_id}: empty hull mask")
    return crop.maps.values[:, crop.mask].mean(axis=1)


def mean_feature_at(crop: RegionCrop, t: int) -> float:
    if not crop.mask.any():
        raise ValidationError(f"region {crop.region_id}: empty hull mask")
    return float(crop.maps.values[t][crop.mask].mean())


def fit_mean_tree(
    features: np.ndarray,
    scaled_targets: np.ndarray,
    region_id: str,
    capacity_series: tuple[CapacityEntry, ...],
    hyperparameters: dict | None = None,
    seed: int = 0,
) -> TrainedModel:
    """Gradient-boosted trees on the single mean-speed feature.

    Deterministic per seed. A constant feature is not an error: the ensemble
    degenerates to predicting the training mean.
    """
    x = np.asarray(features, dtype=np.float64).reshape(-1, 1)
    y = np.asarray(scaled_targets, dtype=np.float64)
    if len(x) != len(y):
        raise ValidationError("features and targets must align")
    if len(x) < MIN_TRAIN_PAIRS:
        raise ValidationError(f"need >= {MIN_TRAIN_PAIRS} training pairs, got {len(x)}")
    params = dict(DEFAULT_TREE_PARAMS)
    if hyperparameters:
        params.update(hyperparameters)
    spec = ModelSpec("mean_tree", params)
    model = GradientBoostingRegressor(
        n_estimators=int(params["n_estimators"]),
        max_depth=int(params["max_depth"]),
        learning_rate=float(params["learning_rate"]),
        min_samples_leaf=int(params["min_samples_leaf"]),
        random_state=seed,
    )
    model.fit(x, y)
    return TrainedModel(
        spec=spec,
        region_id=region_id,
        capacity_series=capacity_series,
        loss_history=(float(np.mean((model.predict(x) - y) ** 2)),),
        predictor=model,
    )

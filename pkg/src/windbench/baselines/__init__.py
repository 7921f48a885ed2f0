"""Reference forecasters and shared train/predict machinery.

Model kinds: `persistence` (time shift of observed power), `mean_tree`
(gradient-boosted trees on the hull-masked regional mean wind speed),
`conv_net` and `patch_attention` (map regressors with grid-searched and
fixed specs respectively), and `dragon` (a searched DAG architecture).
"""

from .specs import MODEL_KINDS, ModelSpec, TrainConfig, TrainedModel, validation_cut
from .data import RegionData, build_region_data
from .persistence import persistence_forecast, persistence_forecast_at, persistence_from_runs
from .mean_tree import fit_mean_tree, mean_feature_at, regional_mean_feature
from .gridsearch import build_attention_spec, build_conv_spec, default_conv_grid
from .training import (
    load_checkpoint,
    predict_power,
    save_checkpoint,
    train_map_regressor,
    validation_mae_mw,
)

__all__ = [
    "MODEL_KINDS",
    "ModelSpec",
    "TrainConfig",
    "TrainedModel",
    "validation_cut",
    "RegionData",
    "build_region_data",
    "persistence_forecast",
    "persistence_forecast_at",
    "persistence_from_runs",
    "fit_mean_tree",
    "mean_feature_at",
    "regional_mean_feature",
    "build_attention_spec",
    "build_conv_spec",
    "default_conv_grid",
    "train_map_regressor",
    "predict_power",
    "validation_mae_mw",
    "save_checkpoint",
    "load_checkpoint",
]

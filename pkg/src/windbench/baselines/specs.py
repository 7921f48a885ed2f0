"""Model specifications, training settings, and trained-model container."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import ValidationError
from ..types import CapacityEntry

MODEL_KINDS = ("persistence", "mean_tree", "conv_net", "patch_attention", "dragon")

# Allowed hyperparameter values per kind; None means free-form (checked in code).
_SCHEMAS: dict[str, dict[str, tuple | None]] = {
    "persistence": {},
    "mean_tree": {
        "n_estimators": None,
        "max_depth": None,
        "learning_rate": None,
        "min_samples_leaf": None,
    },
    "conv_net": {
        "layers": (2, 3, 4),
        "kernel": (3, 5),
        "channels": (8, 16, 32),
        "activation": ("relu", "gelu"),
    },
    "patch_attention": {
        "patch_size": None,
        "embed_dim": None,
        "heads": None,
        "blocks": None,
        "mlp_ratio": None,
    },
    "dragon": {"architecture": None},
}


@dataclass(frozen=True)
class ModelSpec:
    """A forecaster kind with validated hyperparameters and its input size."""

    kind: str
    hyperparameters: dict[str, Any] = field(default_factory=dict)
    input_dims: tuple[int, int] | None = None

    def __post_init__(self):
        schema = _SCHEMAS.get(self.kind)
        if schema is None:
            raise ValidationError(f"unknown model kind {self.kind!r}")
        for key, value in self.hyperparameters.items():
            if key not in schema:
                raise ValidationError(f"{self.kind}: unknown hyperparameter {key!r}")
            allowed = schema[key]
            if allowed is not None and value not in allowed:
                raise ValidationError(
                    f"{self.kind}.{key}={value!r} not in allowed set {allowed}"
                )

    def get(self, key: str, default=None):
        return self.hyperparameters.get(key, default)


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-training settings; the seed fixes all stochasticity."""

    epochs: int = 40
    batch_size: int = 256
    learning_rate: float = 1e-3
    seed: int = 0
    loss: str = "mse"
    early_stop_patience: int = 5
    val_fraction: float = 0.1

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValidationError("epochs, batch_size, and learning_rate must be positive")
        if self.loss != "mse":
            raise ValidationError(f"unsupported loss {self.loss!r}")
        if self.early_stop_patience < 1:
            raise ValidationError("early_stop_patience must be positive")
        if not 0 < self.val_fraction < 0.5:
            raise ValidationError("val_fraction must be in (0, 0.5)")


def validation_cut(n_samples: int, val_fraction: float = 0.1) -> int:
    """Index splitting a chronological training period from its held-out tail."""
    cut = int(round(n_samples * (1.0 - val_fraction)))
    if not 1 <= cut < n_samples:
        raise ValidationError(f"cannot carve a validation tail from {n_samples} samples")
    return cut


@dataclass(frozen=True)
class TrainedModel:
    """A fitted forecaster plus the context needed to emit MW forecasts."""

    spec: ModelSpec
    region_id: str
    capacity_series: tuple[CapacityEntry, ...]
    loss_history: tuple[float, ...]
    predictor: Any  # torch module or sklearn regressor, per spec.kind

    def __post_init__(self):
        if len(self.loss_history) == 0:
            raise ValidationError("loss history must be non-empty")
        if not np.isfinite(self.loss_history[-1]):
            raise ValidationError("final training loss must be finite")

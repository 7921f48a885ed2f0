"""Gradient training loop, MW prediction, and the checkpoint container."""

from __future__ import annotations

import copy
import io
import json
import pickle
from pathlib import Path

import numpy as np
import torch

from ..dragon import arch_from_text, materialize
from ..errors import TrainingDiverged, ValidationError
from ..metrics import mae
from ..prep import installed_for_hours
from ..types import CapacityEntry, PowerSeries
from .data import RegionData
from .nets import INPUT_SCALE, ConvNet, PatchAttentionNet
from .specs import ModelSpec, TrainConfig, TrainedModel, validation_cut

_PREDICT_BATCH = 2048


def build_network(spec: ModelSpec) -> torch.nn.Module:
    if spec.input_dims is None:
        raise ValidationError(f"{spec.kind}: input_dims required to build a network")
    if spec.kind == "conv_net":
        return ConvNet(spec)
    if spec.kind == "patch_attention":
        return PatchAttentionNet(spec)
    if spec.kind == "dragon":
        arch = arch_from_text(spec.get("architecture"))
        return _ScaledDagRegressor(arch, spec.input_dims)
    raise ValidationError(f"{spec.kind!r} is not a trainable map regressor")


class _ScaledDagRegressor(torch.nn.Module):
    """DAG regressor with the shared 0.1 input scaling applied."""

    def __init__(self, arch, input_dims):
        super().__init__()
        self.net = materialize(arch, input_dims)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x * INPUT_SCALE)


def train_map_regressor(
    spec: ModelSpec,
    maps: np.ndarray,
    scaled_targets: np.ndarray,
    cfg: TrainConfig,
    region_id: str = "",
    capacity_series: tuple[CapacityEntry, ...] = (),
) -> TrainedModel:
    """Minimize MSE on capacity-scaled targets with early stopping.

    The chronological tail (cfg.val_fraction) is held out; training stops
    once the held-out MSE has not improved for `early_stop_patience` epochs
    and the best-epoch weights are restored. Deterministic for a fixed seed
    in a single-threaded caller.
    """
    if len(maps) != len(scaled_targets):
        raise ValidationError("maps and targets must align")
    cut = validation_cut(len(maps), cfg.val_fraction)
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    net = build_network(spec)
    optimizer = torch.optim.Adam(net.parameters(), lr=cfg.learning_rate)

    x = torch.from_numpy(np.ascontiguousarray(maps, dtype=np.float32))
    y = torch.from_numpy(np.ascontiguousarray(scaled_targets, dtype=np.float32))
    x_train, y_train = x[:cut], y[:cut]
    x_val, y_val = x[cut:], y[cut:]

    history: list[float] = []
    best_val = float("inf")
    best_state = None
    stale = 0
    for epoch in range(cfg.epochs):
        net.train()
        order = rng.permutation(cut)
        total = 0.0
        for start in range(0, cut, cfg.batch_size):
            idx = torch.from_numpy(order[start : start + cfg.batch_size].copy())
            optimizer.zero_grad()
            loss = torch.mean((net(x_train[idx]) - y_train[idx]) ** 2)
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * len(idx)
        train_loss = total / cut
        if not np.isfinite(train_loss):
            raise TrainingDiverged(epoch=epoch, learning_rate=cfg.learning_rate)
        history.append(train_loss)

        net.eval()
        with torch.no_grad():
            val_loss = float(torch.mean((_batched(net, x_val) - y_val) ** 2))
        if not np.isfinite(val_loss):
            raise TrainingDiverged(epoch=epoch, learning_rate=cfg.learning_rate)
        if val_loss < best_val:
            best_val = val_loss
            best_state = copy.deepcopy(net.state_dict())
            stale = 0
        else:
            stale += 1
            if stale > cfg.early_stop_patience:
                break
    if best_state is not None:
        net.load_state_dict(best_state)
    net.eval()
    return TrainedModel(
        spec=spec,
        region_id=region_id,
        capacity_series=capacity_series,
        loss_history=tuple(history),
        predictor=net,
    )


def _batched(net: torch.nn.Module, x: torch.Tensor) -> torch.Tensor:
    outs = [net(x[i : i + _PREDICT_BATCH]) for i in range(0, len(x), _PREDICT_BATCH)]
    return torch.cat(outs) if len(outs) > 1 else outs[0]


def predict_scaled(model: TrainedModel, inputs: np.ndarray) -> np.ndarray:
    """Raw capacity-scaled predictions (before the MW conversion)."""
    if model.spec.kind == "mean_tree":
        features = np.asarray(inputs, dtype=np.float64).reshape(-1, 1)
        return model.predictor.predict(features)
    if model.spec.kind in ("conv_net", "patch_attention", "dragon"):
        net = model.predictor
        net.eval()
        with torch.no_grad():
            x = torch.from_numpy(np.ascontiguousarray(inputs, dtype=np.float32))
            return _batched(net, x).numpy().astype(np.float64)
    raise ValidationError(f"{model.spec.kind!r} does not predict from map inputs")


def predict_power(
    model: TrainedModel,
    inputs: np.ndarray,
    hours: np.ndarray,
    capacity_series: tuple[CapacityEntry, ...] | None = None,
) -> PowerSeries:
    """Scaled model output times the quarter's installed MW, clamped at 0."""
    capacity = capacity_series if capacity_series is not None else model.capacity_series
    if not capacity:
        raise ValidationError("no capacity series available for MW conversion")
    scaled = predict_scaled(model, inputs)
    installed = installed_for_hours(hours, capacity)
    return PowerSeries(np.asarray(hours, dtype=np.int64), np.maximum(scaled * installed, 0.0))


def validation_mae_mw(model: TrainedModel, data: RegionData, val_fraction: float = 0.1) -> float:
    """MW MAE on the chronological validation tail of a training period."""
    cut = validation_cut(len(data.maps), val_fraction)
    if model.spec.kind == "mean_tree":
        inputs = data.mean_features()[cut:]
    else:
        inputs = data.maps[cut:]
    forecast = predict_power(model, inputs, data.hours[cut:], data.capacity_series)
    return mae(data.truth.slice_hours(int(data.hours[cut]), int(data.hours[-1]) + 1), forecast)


def save_checkpoint(model: TrainedModel, path: str | Path) -> None:
    """Documented container: spec/meta JSON plus named flat parameter arrays.

    Torch parameters are stored as `param::<name>` float arrays; the tree
    baseline stores its fitted ensemble as a pickled byte array.
    """
    meta = {
        "kind": model.spec.kind,
        "hyperparameters": model.spec.hyperparameters,
        "input_dims": list(model.spec.input_dims) if model.spec.input_dims else None,
        "region_id": model.region_id,
        "capacity_series": [
            {"quarter_start_hour": e.quarter_start_hour, "installed_mw": e.installed_mw}
            for e in model.capacity_series
        ],
        "loss_history": list(model.loss_history),
    }
    arrays: dict[str, np.ndarray] = {"meta_json": np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)}
    if model.spec.kind == "mean_tree":
        arrays["sklearn_pickle"] = np.frombuffer(pickle.dumps(model.predictor), dtype=np.uint8)
    else:
        for name, tensor in model.predictor.state_dict().items():
            arrays[f"param::{name}"] = tensor.numpy()
    buffer = io.BytesIO()
    np.savez(buffer, **arrays)
    Path(path).write_bytes(buffer.getvalue())


def load_checkpoint(path: str | Path) -> TrainedModel:
    with np.load(Path(path), allow_pickle=False) as bundle:
        meta = json.loads(bytes(bundle["meta_json"].tobytes()).decode())
        spec = ModelSpec(
            meta["kind"],
            meta["hyperparameters"],
            tuple(meta["input_dims"]) if meta["input_dims"] else None,
        )
        capacity = tuple(
            CapacityEntry(e["quarter_start_hour"], e["installed_mw"])
            for e in meta["capacity_series"]
        )
        if spec.kind == "mean_tree":
            predictor = pickle.loads(bundle["sklearn_pickle"].tobytes())
        else:
            predictor = build_network(spec)
            state = {
                name[len("param::") :]: torch.from_numpy(bundle[name].copy())
                for name in bundle.files
                if name.startswith("param::")
            }
            predictor.load_state_dict(state)
            predictor.eval()
    return TrainedModel(
        spec=spec,
        region_id=meta["region_id"],
        capacity_series=capacity,
        loss_history=tuple(meta["loss_history"]),
        predictor=predictor,
    )

"""Per-region training/evaluation bundles derived from a dataset."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..prep import RegionCrop, build_region_crop, scale_by_capacity
from ..types import CapacityEntry, Dataset, PowerSeries


@dataclass(frozen=True)
class RegionData:
    """One region's crop stack, capacity-scaled targets, and MW ground truth."""

    region_id: str
    crop: RegionCrop
    maps: np.ndarray  # (T, h, w) float32 cropped wind maps
    scaled: np.ndarray  # (T,) capacity-scaled targets
    truth: PowerSeries
    capacity_series: tuple[CapacityEntry, ...]

    @property
    def input_dims(self) -> tuple[int, int]:
        return self.crop.shape

    @property
    def hours(self) -> np.ndarray:
        return self.truth.hours

    def mean_features(self) -> np.ndarray:
        """Hull-masked mean wind speed per time step."""
        return self.maps[:, self.crop.mask].mean(axis=1)


def build_region_data(dataset: Dataset, region_id: str, buffer_cells: float = 2.0) -> RegionData:
    region = dataset.region(region_id)
    crop = build_region_crop(dataset.maps, region, buffer_cells=buffer_cells)
    truth = dataset.power[region_id]
    return RegionData(
        region_id=region_id,
        crop=crop,
        maps=crop.maps.values,
        scaled=scale_by_capacity(truth, region.capacity_series),
        truth=truth,
        capacity_series=region.capacity_series,
    )

"""Shared domain types.

All types are immutable values after construction and safe to share
read-only across concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import timeutil
from .errors import ValidationError

DEFAULT_HORIZONS = (1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class MapSeries:
    """Hourly stack of 2D wind-speed grids, indexed [time, row, col] in m/s.

    Row 0 is north. The time axis starts at `start_hour` (epoch-hours UTC)
    and advances by exactly one hour per step.
    """

    values: np.ndarray
    start_hour: int
    step_hours: int = 1

    def __post_init__(self):
        v = self.values
        if v.ndim != 3:
            raise ValidationError(f"map stack must be 3D, got ndim={v.ndim}")
        if v.dtype != np.float32:
            object.__setattr__(self, "values", v.astype(np.float32))
            v = self.values
        t, m, n = v.shape
        if t < 1:
            raise ValidationError("map stack needs at least one time step")
        if m < 2 or n < 2:
            raise ValidationError(f"grid must be at least 2x2, got {m}x{n}")
        if self.step_hours != 1:
            raise ValidationError("only hourly map stacks are supported")
        if not np.all(np.isfinite(v)):
            raise ValidationError("wind speeds must be finite")
        if v.min() < 0:
            raise ValidationError("wind speeds must be >= 0")

    @property
    def steps(self) -> int:
        return self.values.shape[0]

    @property
    def rows(self) -> int:
        return self.values.shape[1]

    @property
    def cols(self) -> int:
        return self.values.shape[2]

    @property
    def end_hour(self) -> int:
        """One past the last covered hour."""
        return self.start_hour + self.steps

    def hours(self) -> np.ndarray:
        return self.start_hour + np.arange(self.steps, dtype=np.int64)

    def index_of(self, hour: int) -> int:
        idx = int(hour) - self.start_hour
        if not 0 <= idx < self.steps:
            raise ValidationError(
                f"hour {timeutil.format_iso_hour(hour)} outside map stack range"
            )
        return idx

    def slice_hours(self, start_hour: int, end_hour: int) -> "MapSeries":
        i0 = self.index_of(start_hour)
        i1 = self.index_of(end_hour - 1) + 1
        return MapSeries(self.values[i0:i1], start_hour=start_hour)


@dataclass(frozen=True)
class PowerSeries:
    """Hourly power values in MW with epoch-hour timestamps."""

    hours: np.ndarray
    power_mw: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.hours, dtype=np.int64)
        p = np.asarray(self.power_mw, dtype=np.float64)
        object.__setattr__(self, "hours", h)
        object.__setattr__(self, "power_mw", p)
        if h.ndim != 1 or p.ndim != 1 or len(h) != len(p):
            raise ValidationError("timestamps and power values must align 1:1")
        if len(h) == 0:
            raise ValidationError("empty power series")
        if not np.all(np.diff(h) == 1):
            raise ValidationError("power series timestamps must be hourly without gaps")
        if not np.all(np.isfinite(p)):
            raise ValidationError("power values must be finite")
        if p.min() < 0:
            raise ValidationError("power values must be >= 0")

    def __len__(self) -> int:
        return len(self.hours)

    @property
    def start_hour(self) -> int:
        return int(self.hours[0])

    @property
    def end_hour(self) -> int:
        return int(self.hours[-1]) + 1

    def value_at(self, hour: int) -> float:
        idx = int(hour) - self.start_hour
        if not 0 <= idx < len(self):
            raise ValidationError(
                f"hour {timeutil.format_iso_hour(hour)} outside power series range"
            )
        return float(self.power_mw[idx])

    def slice_hours(self, start_hour: int, end_hour: int) -> "PowerSeries":
        i0 = int(start_hour) - self.start_hour
        i1 = int(end_hour) - self.start_hour
        if i0 < 0 or i1 > len(self) or i1 <= i0:
            raise ValidationError("slice outside power series range")
        return PowerSeries(self.hours[i0:i1], self.power_mw[i0:i1])


@dataclass(frozen=True)
class Farm:
    """Wind farm at fractional grid coordinates (x = column, y = row)."""

    x: float
    y: float
    capacity_mw: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValidationError("farm coordinates must be finite")
        if self.capacity_mw <= 0:
            raise ValidationError("farm capacity must be positive")


@dataclass(frozen=True)
class CapacityEntry:
    """Installed capacity valid from the start of one calendar quarter."""

    quarter_start_hour: int
    installed_mw: float

    def __post_init__(self):
        if timeutil.quarter_start_hour(self.quarter_start_hour) != self.quarter_start_hour:
            raise ValidationError("capacity entry must start on a quarter boundary")
        if self.installed_mw <= 0:
            raise ValidationError("installed capacity must be positive")


@dataclass(frozen=True)
class RegionSpec:
    """A region's wind farms and quarterly installed-capacity series."""

    region_id: str
    farms: tuple[Farm, ...]
    capacity_series: tuple[CapacityEntry, ...]
    hull_mask: np.ndarray | None = None

    def __post_init__(self):
        if not self.region_id:
            raise ValidationError("region_id must be non-empty")
        if len(self.farms) < 1:
            raise ValidationError(f"region {self.region_id} needs at least one farm")
        if len(self.capacity_series) < 1:
            raise ValidationError(f"region {self.region_id} needs a capacity series")
        starts = [e.quarter_start_hour for e in self.capacity_series]
        if sorted(set(starts)) != starts:
            raise ValidationError(
                f"region {self.region_id}: capacity series must be strictly "
                "increasing by quarter start"
            )

    @property
    def total_farm_capacity_mw(self) -> float:
        return float(sum(f.capacity_mw for f in self.farms))

    def check_farms_in_grid(self, rows: int, cols: int) -> None:
        for i, f in enumerate(self.farms):
            if not (0 <= f.x <= cols - 1 and 0 <= f.y <= rows - 1):
                raise ValidationError(
                    f"region {self.region_id}: farm {i} at ({f.x}, {f.y}) "
                    f"outside {rows}x{cols} grid"
                )

    def check_capacity_covers(self, start_hour: int, end_hour: int) -> None:
        first = self.capacity_series[0].quarter_start_hour
        if first > start_hour:
            raise ValidationError(
                f"region {self.region_id}: capacity series starts "
                f"{timeutil.format_iso_hour(first)}, after the dataset start"
            )
        # later quarters inherit the most recent entry, so no upper-end check


@dataclass(frozen=True)
class Dataset:
    """Map stack, regions, and aligned ground-truth power per region."""

    maps: MapSeries
    regions: tuple[RegionSpec, ...]
    power: dict[str, PowerSeries]
    horizon_set: tuple[int, ...] = DEFAULT_HORIZONS

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.regions:
            raise ValidationError("dataset needs at least one region")
        ids = [r.region_id for r in self.regions]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate region ids")
        hs = tuple(self.horizon_set)
        if not hs or any(h not in DEFAULT_HORIZONS for h in hs):
            raise ValidationError("horizon_set must be a non-empty subset of 1..6")
        for region in self.regions:
            series = self.power.get(region.region_id)
            if series is None:
                raise ValidationError(f"missing power series for {region.region_id}")
            if len(series) != self.maps.steps or series.start_hour != self.maps.start_hour:
                raise ValidationError(
                    f"region {region.region_id}: power series not aligned 1:1 "
                    f"with the map time axis"
                )
            region.check_farms_in_grid(self.maps.rows, self.maps.cols)
            region.check_capacity_covers(self.maps.start_hour, self.maps.end_hour)

    @property
    def region_ids(self) -> list[str]:
        return [r.region_id for r in self.regions]

    def region(self, region_id: str) -> RegionSpec:
        for r in self.regions:
            if r.region_id == region_id:
                return r
        raise ValidationError(f"unknown region {region_id!r}")


@dataclass(frozen=True)
class ForecastRunIndex:
    """Maps each target hour to its most recent forecast run.

    Runs are issued every `run_period` hours (at hours divisible by the
    period, i.e. 00/06/12/18 UTC for the default) and each provides lead
    times 1..run_period, so every target hour is covered by exactly one run.
    """

    run_period: int = 6

    def __post_init__(self):
        if self.run_period < 1:
            raise ValidationError("run period must be >= 1 hour")

    def run_for(self, hour: int) -> int:
        return ((int(hour) - 1) // self.run_period) * self.run_period

    def lead_for(self, hour: int) -> int:
        return int(hour) - self.run_for(hour)

    def leads_for(self, hours: np.ndarray) -> np.ndarray:
        h = np.asarray(hours, dtype=np.int64)
        return h - ((h - 1) // self.run_period) * self.run_period


def with_hull_mask(region: RegionSpec, mask: np.ndarray) -> RegionSpec:
    return replace(region, hull_mask=mask)

"""Synthetic benchmark data: correlated wind fields, farm layouts, power targets.

Stands in for the external weather-model and grid-operator feeds with the
same interfaces: hourly wind-speed map stacks plus per-region hourly power.
Everything is a pure function of (config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from . import timeutil
from .errors import ValidationError
from .types import CapacityEntry, Dataset, Farm, MapSeries, PowerSeries, RegionSpec

SPEED_CAP = 40.0  # m/s, physical clamp for generated fields


@dataclass(frozen=True)
class FieldParams:
    """First/second-order statistics of the generated wind field."""

    mean_speed: float = 7.5
    std_speed: float = 3.0
    spatial_smoothing_cells: float = 1.5
    temporal_ar1: float = 0.97
    rng_seed: int = 0

    def __post_init__(self):
        if self.mean_speed <= 0:
            raise ValidationError("mean_speed must be positive")
        if self.std_speed < 0:
            raise ValidationError("std_speed must be >= 0")
        if self.spatial_smoothing_cells < 0:
            raise ValidationError("spatial_smoothing_cells must be >= 0")
        if not 0 <= self.temporal_ar1 < 1:
            raise ValidationError("temporal_ar1 must be in [0, 1)")


@dataclass(frozen=True)
class TurbineParams:
    """Cut-in / rated / cut-out speeds of the aggregate turbine model, m/s."""

    cut_in: float = 3.0
    rated: float = 12.0
    cut_out: float = 25.0

    def __post_init__(self):
        if not 0 < self.cut_in < self.rated < self.cut_out:
            raise ValidationError(
                f"need 0 < cut_in < rated < cut_out, got "
                f"({self.cut_in}, {self.rated}, {self.cut_out})"
            )


def generate_wind_fields(
    dims: tuple[int, int, int],
    params: FieldParams,
    start_hour: int | None = None,
) -> MapSeries:
    """AR(1)-in-time field over spatially smoothed white noise.

    The raw field is affinely rescaled to the target mean/std and clamped to
    [0, 40] m/s. Deterministic given params.rng_seed.
    """
    t, m, n = dims
    if t < 1 or m < 2 or n < 2:
        raise ValidationError(f"bad field dims {dims}")
    if start_hour is None:
        start_hour = timeutil.date_to_hour(2018)
    if params.std_speed == 0.0:
        values = np.full((t, m, n), params.mean_speed, dtype=np.float32)
        return MapSeries(values, start_hour=start_hour)

    rng = np.random.default_rng(params.rng_seed)
    noise = rng.standard_normal((t, m, n), dtype=np.float32)
    if params.spatial_smoothing_cells > 0:
        # truncated isotropic kernel of radius 3 * smoothing_cells
        noise = gaussian_filter(
            noise,
            sigma=(0.0, params.spatial_smoothing_cells, params.spatial_smoothing_cells),
            truncate=3.0,
            mode="nearest",
        )
    field = np.empty_like(noise)
    field[0] = noise[0]
    phi = np.float32(params.temporal_ar1)
    innovation = np.float32(math.sqrt(1.0 - params.temporal_ar1**2))
    for step in range(1, t):
        field[step] = phi * field[step - 1] + innovation * noise[step]
    flat = field.astype(np.float64)
    mu, sigma = flat.mean(), flat.std()
    if sigma == 0:
        scaled = np.full_like(flat, params.mean_speed)
    else:
        scaled = params.mean_speed + params.std_speed * (flat - mu) / sigma
    np.clip(scaled, 0.0, SPEED_CAP, out=scaled)
    return MapSeries(scaled.astype(np.float32), start_hour=start_hour)


def power_curve(speed, turbine: TurbineParams):
    """Capacity factor in [0, 1] for hub-height speed(s) in m/s.

    Zero below cut-in and at/above cut-out, cubic ramp on [cut_in, rated),
    one on [rated, cut_out).
    """
    v = np.asarray(speed, dtype=np.float64)
    if np.any(v < 0):
        raise ValidationError("wind speed must be >= 0")
    lo3 = turbine.cut_in**3
    hi3 = turbine.rated**3
    ramp = (v**3 - lo3) / (hi3 - lo3)
    cf = np.where(v < turbine.cut_in, 0.0, np.where(v < turbine.rated, ramp, 1.0))
    cf = np.where(v >= turbine.cut_out, 0.0, cf)
    if np.isscalar(speed) or np.ndim(speed) == 0:
        return float(cf)
    return cf


def bilinear_sample(grid: np.ndarray, x: float, y: float) -> np.ndarray:
    """Sample grid(s) at fractional (x=col, y=row); cell centers at integers.

    `grid` may be a single 2D map or a (T, m, n) stack; the same point is
    sampled from every time step.
    """
    arr = np.asarray(grid)
    rows, cols = arr.shape[-2:]
    if not (0 <= x <= cols - 1 and 0 <= y <= rows - 1):
        raise ValidationError(f"sample point ({x}, {y}) outside {rows}x{cols} grid")
    c0 = min(int(math.floor(x)), cols - 2)
    r0 = min(int(math.floor(y)), rows - 2)
    fx = x - c0
    fy = y - r0
    v00 = arr[..., r0, c0]
    v01 = arr[..., r0, c0 + 1]
    v10 = arr[..., r0 + 1, c0]
    v11 = arr[..., r0 + 1, c0 + 1]
    return (
        v00 * (1 - fx) * (1 - fy)
        + v01 * fx * (1 - fy)
        + v10 * (1 - fx) * fy
        + v11 * fx * fy
    )


def synthesize_power(
    maps: MapSeries,
    region: RegionSpec,
    turbine: TurbineParams,
    noise_std_mw: float = 0.0,
    seed: int = 0,
) -> PowerSeries:
    """Ground-truth regional power from farm-point wind through the power curve.

    power(t) = max(0, sum_farms capacity * curve(speed at farm) + gaussian noise),
    quantized to 3 decimals so the in-memory series matches its CSV round trip.
    """
    region.check_farms_in_grid(maps.rows, maps.cols)
    total = np.zeros(maps.steps, dtype=np.float64)
    for farm in region.farms:
        speeds = bilinear_sample(maps.values, farm.x, farm.y).astype(np.float64)
        total += farm.capacity_mw * power_curve(speeds, turbine)
    if noise_std_mw > 0:
        rng = np.random.default_rng(seed)
        total += rng.normal(0.0, noise_std_mw, size=maps.steps)
    np.maximum(total, 0.0, out=total)
    return PowerSeries(maps.hours(), np.round(total, 3))


@dataclass(frozen=True)
class BenchmarkConfig:
    """Layout and physics of a generated benchmark dataset."""

    n_regions: int = 4
    farms_per_region: int = 3
    rows: int = 32
    cols: int = 32
    start_year: int = 2018
    end_year: int = 2020
    field: FieldParams = FieldParams()
    turbine: TurbineParams = TurbineParams()
    noise_std_mw: float = 0.5
    farm_capacity_range_mw: tuple[float, float] = (5.0, 20.0)
    seed: int = 0

    def __post_init__(self):
        if self.n_regions < 1 or self.farms_per_region < 1:
            raise ValidationError("need at least one region and one farm per region")
        if self.end_year < self.start_year:
            raise ValidationError("end_year must be >= start_year")
        lo, hi = self.farm_capacity_range_mw
        if not 0 < lo <= hi:
            raise ValidationError("bad farm capacity range")


def _region_blocks(rows: int, cols: int, n_regions: int) -> list[tuple[float, float, float, float]]:
    """Disjoint (y0, y1, x0, x1) blocks, one per region, on a near-square tiling."""
    per_side = math.ceil(math.sqrt(n_regions))
    block_h = rows / per_side
    block_w = cols / per_side
    blocks = []
    for i in range(n_regions):
        by, bx = divmod(i, per_side)
        blocks.append((by * block_h, (by + 1) * block_h, bx * block_w, (bx + 1) * block_w))
    return blocks


def generate_benchmark(cfg: BenchmarkConfig) -> Dataset:
    """Full synthetic dataset: maps, disjoint regional farm clusters, targets."""
    years = list(range(cfg.start_year, cfg.end_year + 1))
    start_hour, steps = timeutil.hours_of_years(years)
    seeds = np.random.SeedSequence(cfg.seed).spawn(2 + cfg.n_regions)
    field_params = FieldParams(
        mean_speed=cfg.field.mean_speed,
        std_speed=cfg.field.std_speed,
        spatial_smoothing_cells=cfg.field.spatial_smoothing_cells,
        temporal_ar1=cfg.field.temporal_ar1,
        rng_seed=cfg.field.rng_seed,
    )
    maps = generate_wind_fields((steps, cfg.rows, cfg.cols), field_params, start_hour=start_hour)

    layout_rng = np.random.default_rng(seeds[0])
    margin = 1.5  # keep farms, and their hull buffers, inside the grid
    blocks = _region_blocks(cfg.rows, cfg.cols, cfg.n_regions)
    quarter_hours = timeutil.quarter_starts_covering(start_hour, start_hour + steps)
    regions = []
    power = {}
    for i, (y0, y1, x0, x1) in enumerate(blocks):
        if (y1 - y0) <= 2 * margin or (x1 - x0) <= 2 * margin:
            raise ValidationError(
                f"grid {cfg.rows}x{cfg.cols} too small for {cfg.n_regions} regions"
            )
        region_id = f"R{i}"
        lo, hi = cfg.farm_capacity_range_mw
        farms = []
        for _ in range(cfg.farms_per_region):
            fx = layout_rng.uniform(x0 + margin, x1 - margin)
            fy = layout_rng.uniform(y0 + margin, y1 - margin)
            cap = round(float(layout_rng.uniform(lo, hi)), 1)
            farms.append(Farm(round(float(fx), 3), round(float(fy), 3), cap))
        installed = round(sum(f.capacity_mw for f in farms), 3)
        capacity = tuple(CapacityEntry(q, installed) for q in quarter_hours)
        region = RegionSpec(region_id, tuple(farms), capacity)
        region_seed = int(np.random.default_rng(seeds[2 + i]).integers(0, 2**63 - 1))
        power[region_id] = synthesize_power(
            maps, region, cfg.turbine, noise_std_mw=cfg.noise_std_mw, seed=region_seed
        )
        regions.append(region)
    return Dataset(maps, tuple(regions), power)

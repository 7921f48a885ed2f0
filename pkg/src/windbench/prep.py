"""Region-map preparation: buffered convex hulls, capacity scaling, splits.

Each region's map crop is the bounding box of the cells whose centers fall
inside the convex hull of its farm locations, with each farm widened by a
16-gon buffer. Cells outside the hull keep their wind values: the crop is a
seamless rectangle, the boolean mask only marks hull membership.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from . import timeutil
from .errors import DegenerateHullError, ValidationError
from .types import CapacityEntry, Dataset, Farm, MapSeries, PowerSeries, RegionSpec

_COLLINEAR_EPS = 1e-12
DEFAULT_BUFFER_CELLS = 2.0
BUFFER_POLYGON_SIDES = 16


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> list[tuple[float, float]]:
    """Convex hull via monotone chain.

    Returns vertices counter-clockwise starting from the lexicographically
    smallest, with no three consecutive collinear vertices. Raises
    DegenerateHullError for < 3 distinct points or an all-collinear set.
    """
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) < 3:
        raise DegenerateHullError(f"need >= 3 distinct points, got {len(pts)}")

    def half(seq):
        chain: list[tuple[float, float]] = []
        for p in seq:
            while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= _COLLINEAR_EPS:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateHullError("all points collinear")
    return hull


def point_in_convex_polygon(point, polygon, eps: float = 1e-9) -> bool:
    """Membership test for a CCW convex polygon; boundary counts as inside."""
    x, y = float(point[0]), float(point[1])
    n = len(polygon)
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        if (bx - ax) * (y - ay) - (by - ay) * (x - ax) < -eps:
            return False
    return True


def _buffer_points(farms: tuple[Farm, ...], buffer_cells: float) -> list[tuple[float, float]]:
    angles = 2.0 * np.pi * np.arange(BUFFER_POLYGON_SIDES) / BUFFER_POLYGON_SIDES
    dx = buffer_cells * np.cos(angles)
    dy = buffer_cells * np.sin(angles)
    pts = []
    for farm in farms:
        for k in range(BUFFER_POLYGON_SIDES):
            pts.append((farm.x + float(dx[k]), farm.y + float(dy[k])))
    return pts


@dataclass(frozen=True)
class RegionCrop:
    """A region's rectangular map view plus its hull geometry.

    Bounding-box rows/cols are inclusive. `mask` is aligned with `maps`
    (the cropped view) and marks cells whose centers lie inside the hull.
    Hull vertices and farm coordinates are in parent-grid coordinates.
    """

    region_id: str
    row0: int
    row1: int
    col0: int
    col1: int
    hull: tuple[tuple[float, float], ...]
    mask: np.ndarray
    maps: MapSeries
    farms: tuple[Farm, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.row1 - self.row0 + 1, self.col1 - self.col0 + 1)

    @property
    def mask_density(self) -> float:
        return float(self.mask.mean())

    def geometry_report(self) -> str:
        h, w = self.shape
        lines = [
            f"region: {self.region_id}",
            f"bbox: rows {self.row0}..{self.row1}, cols {self.col0}..{self.col1} ({h}x{w})",
            f"mask: {int(self.mask.sum())} of {h * w} cells ({self.mask_density:.1%})",
            f"farms: {len(self.farms)}",
            "hull vertices (x, y):",
        ]
        for x, y in self.hull:
            lines.append(f"  {x:.3f}, {y:.3f}")
        return "\n".join(lines)


def build_region_crop(
    maps: MapSeries, region: RegionSpec, buffer_cells: float = DEFAULT_BUFFER_CELLS
) -> RegionCrop:
    """Buffered convex hull of the region's farms, rasterized to a cell mask."""
    if buffer_cells <= 0:
        raise ValidationError("buffer_cells must be positive")
    region.check_farms_in_grid(maps.rows, maps.cols)
    hull = convex_hull(_buffer_points(region.farms, buffer_cells))

    xs = [p[0] for p in hull]
    ys = [p[1] for p in hull]
    scan_r0 = max(0, int(np.floor(min(ys))))
    scan_r1 = min(maps.rows - 1, int(np.ceil(max(ys))))
    scan_c0 = max(0, int(np.floor(min(xs))))
    scan_c1 = min(maps.cols - 1, int(np.ceil(max(xs))))
    full = np.zeros((maps.rows, maps.cols), dtype=bool)
    for r in range(scan_r0, scan_r1 + 1):
        for c in range(scan_c0, scan_c1 + 1):
            full[r, c] = point_in_convex_polygon((c, r), hull)
    if not full.any():
        raise ValidationError(
            f"region {region.region_id}: hull contains no cell centers; "
            f"increase buffer_cells (got {buffer_cells})"
        )
    rows_any = np.nonzero(full.any(axis=1))[0]
    cols_any = np.nonzero(full.any(axis=0))[0]
    row0, row1 = int(rows_any[0]), int(rows_any[-1])
    col0, col1 = int(cols_any[0]), int(cols_any[-1])
    cropped = MapSeries(maps.values[:, row0 : row1 + 1, col0 : col1 + 1], maps.start_hour)
    return RegionCrop(
        region_id=region.region_id,
        row0=row0,
        row1=row1,
        col0=col0,
        col1=col1,
        hull=tuple(hull),
        mask=full[row0 : row1 + 1, col0 : col1 + 1],
        maps=cropped,
        farms=region.farms,
    )


def installed_for_hours(hours: np.ndarray, capacity_series: tuple[CapacityEntry, ...]) -> np.ndarray:
    """Installed MW per timestamp: the most recent quarter entry applies."""
    starts = [e.quarter_start_hour for e in capacity_series]
    values = np.array([e.installed_mw for e in capacity_series], dtype=np.float64)
    out = np.empty(len(hours), dtype=np.float64)
    for i, hour in enumerate(np.asarray(hours, dtype=np.int64)):
        idx = bisect.bisect_right(starts, int(hour)) - 1
        if idx < 0:
            raise ValidationError(
                f"timestamp {timeutil.format_iso_hour(int(hour))} precedes the "
                "first capacity quarter"
            )
        out[i] = values[idx]
    return out


def scale_by_capacity(power: PowerSeries, capacity_series: tuple[CapacityEntry, ...]) -> np.ndarray:
    """Power divided by the installed capacity of each timestamp's quarter."""
    installed = installed_for_hours(power.hours, capacity_series)
    return power.power_mw / installed


def unscale_by_capacity(
    scaled: np.ndarray, hours: np.ndarray, capacity_series: tuple[CapacityEntry, ...]
) -> np.ndarray:
    installed = installed_for_hours(hours, capacity_series)
    return np.asarray(scaled, dtype=np.float64) * installed


def chronological_split(
    dataset: Dataset, train_years, test_years
) -> tuple[Dataset, Dataset]:
    """Split by calendar year; training must strictly precede testing."""
    train = sorted(set(int(y) for y in train_years))
    test = sorted(set(int(y) for y in test_years))
    if not train or not test:
        raise ValidationError("train and test year sets must be non-empty")
    if set(train) & set(test):
        raise ValidationError(f"overlapping year sets: {sorted(set(train) & set(test))}")
    if max(train) >= min(test):
        raise ValidationError("training years must strictly precede test years")

    def subset(years: list[int]) -> Dataset:
        start, count = timeutil.hours_of_years(years)
        lo, hi = dataset.maps.start_hour, dataset.maps.end_hour
        if start < lo or start + count > hi:
            raise ValidationError(f"years {years} not fully covered by the dataset")
        maps = dataset.maps.slice_hours(start, start + count)
        power = {
            rid: series.slice_hours(start, start + count)
            for rid, series in dataset.power.items()
        }
        return Dataset(maps, dataset.regions, power, dataset.horizon_set)

    return subset(train), subset(test)

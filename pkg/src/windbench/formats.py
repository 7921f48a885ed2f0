"""Bit-exact on-disk formats.

Map stack ("WDGS", little-endian throughout):

    offset  size  field
    0       4     magic b"WDGS"
    4       2     u16 version (= 1)
    6       4     u32 T (time steps)
    10      4     u32 m (rows)
    14      4     u32 n (cols)
    18      8     u64 start epoch-hours
    26      4*T*m*n  float32 payload, row-major, time-major, no padding

Power CSV: header `timestamp,power_mw`, one row per hour, ISO-8601 UTC
timestamps, power as decimal text with at most 3 fractional digits, UTF-8,
LF line endings.

Region manifest: JSON object with keys `region_id`, `farms` (list of
`{x, y, capacity_mw}`), `capacity_series` (list of
`{quarter_start: "YYYY-MM-DD", installed_mw}`).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from . import timeutil
from .errors import FormatError, ValidationError
from .types import CapacityEntry, Dataset, Farm, MapSeries, PowerSeries, RegionSpec

MAGIC = b"WDGS"
VERSION = 1
_HEADER = struct.Struct("<4sHIIIQ")  # magic, version, T, m, n, start hour


def write_map_stack(series: MapSeries, path: str | Path) -> None:
    values = np.ascontiguousarray(series.values, dtype="<f4")
    header = _HEADER.pack(
        MAGIC, VERSION, series.steps, series.rows, series.cols, series.start_hour
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(values.tobytes())


def read_map_stack(path: str | Path) -> MapSeries:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FormatError("truncated header", offset=len(head))
        magic, version, t, m, n, start = _HEADER.unpack(head)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
        if version != VERSION:
            raise FormatError(f"unsupported version {version}", offset=4)
        if t < 1:
            raise FormatError("time dimension must be >= 1", offset=6)
        if m < 2:
            raise FormatError("row dimension must be >= 2", offset=10)
        if n < 2:
            raise FormatError("col dimension must be >= 2", offset=14)
        expected = 4 * t * m * n
        payload = fh.read(expected + 1)
    if len(payload) < expected:
        raise FormatError(
            f"truncated payload: expected {expected} bytes, got {len(payload)}",
            offset=_HEADER.size + len(payload),
        )
    if len(payload) > expected:
        raise FormatError("trailing bytes after payload", offset=_HEADER.size + expected)
    values = np.frombuffer(payload, dtype="<f4").reshape(t, m, n).copy()
    return MapSeries(values, start_hour=int(start))


POWER_HEADER = "timestamp,power_mw"


def format_power(value: float) -> str:
    """Decimal text with at most 3 fractional digits, trailing zeros kept."""
    return f"{value:.3f}"


def write_power_csv(series: PowerSeries, path: str | Path) -> None:
    lines = [POWER_HEADER]
    for hour, mw in zip(series.hours, series.power_mw):
        lines.append(f"{timeutil.format_iso_hour(int(hour))},{format_power(float(mw))}")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def read_power_csv(path: str | Path) -> PowerSeries:
    text = Path(path).read_bytes().decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != POWER_HEADER:
        raise ValidationError(
            f"{path}: expected header {POWER_HEADER!r}, got {lines[0]!r}"
            if lines
            else f"{path}: empty file"
        )
    hours = []
    power = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise ValidationError(f"{path}:{lineno}: expected 2 fields, got {len(parts)}")
        hours.append(timeutil.parse_iso_hour(parts[0]))
        try:
            value = float(parts[1])
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: bad power value {parts[1]!r}") from None
        if value < 0:
            raise ValidationError(f"{path}:{lineno}: negative power {value}")
        power.append(value)
    if not hours:
        raise ValidationError(f"{path}: no data rows")
    harr = np.asarray(hours, dtype=np.int64)
    gaps = np.diff(harr)
    if np.any(gaps != 1):
        missing = []
        for i in np.nonzero(gaps != 1)[0]:
            if gaps[i] < 1:
                raise ValidationError(f"{path}: timestamps not strictly increasing hourly")
            missing.extend(range(int(harr[i]) + 1, int(harr[i + 1])))
        shown = ", ".join(timeutil.format_iso_hour(h) for h in missing[:10])
        more = "" if len(missing) <= 10 else f" (+{len(missing) - 10} more)"
        raise ValidationError(f"{path}: missing hourly timestamps: {shown}{more}")
    return PowerSeries(harr, np.asarray(power, dtype=np.float64))


def write_region_manifest(region: RegionSpec, path: str | Path) -> None:
    doc = {
        "region_id": region.region_id,
        "farms": [
            {"x": f.x, "y": f.y, "capacity_mw": f.capacity_mw} for f in region.farms
        ],
        "capacity_series": [
            {
                "quarter_start": timeutil.hour_to_datetime(e.quarter_start_hour)
                .date()
                .isoformat(),
                "installed_mw": e.installed_mw,
            }
            for e in region.capacity_series
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def read_region_manifest(path: str | Path) -> RegionSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid manifest: {exc}") from None
    try:
        farms = tuple(
            Farm(float(f["x"]), float(f["y"]), float(f["capacity_mw"]))
            for f in doc["farms"]
        )
        entries = []
        for e in doc["capacity_series"]:
            year, month, day = (int(p) for p in e["quarter_start"].split("-"))
            entries.append(
                CapacityEntry(timeutil.date_to_hour(year, month, day), float(e["installed_mw"]))
            )
        return RegionSpec(str(doc["region_id"]), farms, tuple(entries))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: invalid manifest: {exc}") from None


def save_dataset(dataset: Dataset, directory: str | Path) -> None:
    root = Path(directory)
    (root / "regions").mkdir(parents=True, exist_ok=True)
    (root / "power").mkdir(parents=True, exist_ok=True)
    write_map_stack(dataset.maps, root / "maps.wdgs")
    for region in dataset.regions:
        write_region_manifest(region, root / "regions" / f"{region.region_id}.json")
        write_power_csv(dataset.power[region.region_id], root / "power" / f"{region.region_id}.csv")
    meta = {
        "region_ids": dataset.region_ids,
        "horizon_set": list(dataset.horizon_set),
    }
    (root / "dataset.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def load_dataset(directory: str | Path) -> Dataset:
    root = Path(directory)
    meta_path = root / "dataset.json"
    if not meta_path.exists():
        raise ValidationError(f"{root}: not a dataset directory (missing dataset.json)")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    maps = read_map_stack(root / "maps.wdgs")
    regions = []
    power = {}
    for region_id in meta["region_ids"]:
        region = read_region_manifest(root / "regions" / f"{region_id}.json")
        if region.region_id != region_id:
            raise ValidationError(f"manifest for {region_id} names {region.region_id}")
        regions.append(region)
        power[region_id] = read_power_csv(root / "power" / f"{region_id}.csv")
    return Dataset(maps, tuple(regions), power, horizon_set=tuple(meta["horizon_set"]))

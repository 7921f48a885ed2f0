"""Epoch-hour time arithmetic.

All timestamps in the package are integer hours since 1970-01-01T00:00:00Z.
CSV files carry ISO-8601 UTC strings (`2020-01-01T00:00:00Z`); binary headers
carry the epoch-hour integer directly.
"""

from __future__ import annotations

import datetime as _dt

import numpy as np

from .errors import ValidationError

_EPOCH = _dt.datetime(1970, 1, 1, tzinfo=_dt.timezone.utc)
HOURS_PER_DAY = 24


def hour_to_datetime(hour: int) -> _dt.datetime:
    return _EPOCH + _dt.timedelta(hours=int(hour))


def datetime_to_hour(dt: _dt.datetime) -> int:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=_dt.timezone.utc)
    delta = dt - _EPOCH
    seconds = delta.days * 86400 + delta.seconds
    if seconds % 3600 != 0 or delta.microseconds:
        raise ValidationError(f"timestamp {dt.isoformat()} is not on an exact hour")
    return seconds // 3600


def date_to_hour(year: int, month: int = 1, day: int = 1) -> int:
    return datetime_to_hour(_dt.datetime(year, month, day, tzinfo=_dt.timezone.utc))


def format_iso_hour(hour: int) -> str:
    return hour_to_datetime(hour).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_iso_hour(text: str) -> int:
    """Parse an ISO-8601 UTC timestamp on an exact hour to an epoch-hour."""
    raw = text.strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    try:
        dt = _dt.datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ValidationError(f"bad timestamp {text!r}: {exc}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=_dt.timezone.utc)
    elif dt.utcoffset() != _dt.timedelta(0):
        raise ValidationError(f"timestamp {text!r} is not UTC")
    return datetime_to_hour(dt)


def year_of_hour(hour: int) -> int:
    return hour_to_datetime(hour).year


def hours_of_years(years: list[int] | tuple[int, ...]) -> tuple[int, int]:
    """(start_hour, count) for a contiguous run of calendar years."""
    ys = sorted(set(int(y) for y in years))
    if not ys:
        raise ValidationError("empty year list")
    if ys != list(range(ys[0], ys[-1] + 1)):
        raise ValidationError(f"years {ys} are not contiguous")
    start = date_to_hour(ys[0])
    end = date_to_hour(ys[-1] + 1)
    return start, end - start


def quarter_start_hour(hour: int) -> int:
    """Epoch-hour of the first hour of the calendar quarter containing `hour`."""
    dt = hour_to_datetime(hour)
    month = 3 * ((dt.month - 1) // 3) + 1
    return date_to_hour(dt.year, month, 1)


def quarter_starts_covering(start_hour: int, end_hour: int) -> list[int]:
    """Quarter-start hours whose quarters intersect [start_hour, end_hour)."""
    if end_hour <= start_hour:
        raise ValidationError("empty hour range")
    out = [quarter_start_hour(start_hour)]
    while True:
        dt = hour_to_datetime(out[-1])
        month = dt.month + 3
        year = dt.year + (month - 1) // 12
        month = (month - 1) % 12 + 1
        nxt = date_to_hour(year, month, 1)
        if nxt >= end_hour:
            return out
        out.append(nxt)


def years_of_hours(hours: np.ndarray) -> np.ndarray:
    """Vectorized calendar year per epoch-hour (via days-since-epoch lookup)."""
    days = np.asarray(hours, dtype=np.int64) // HOURS_PER_DAY
    dates = days.astype("datetime64[D]")
    return dates.astype("datetime64[Y]").astype(np.int64) + 1970

"""Forecast scores and bottom-up aggregation."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .types import PowerSeries


def _check_aligned(truth: PowerSeries, forecast: PowerSeries) -> None:
    if len(truth) != len(forecast) or truth.start_hour != forecast.start_hour:
        raise ValidationError(
            "misaligned series: truth covers "
            f"[{truth.start_hour}, {truth.end_hour}), forecast "
            f"[{forecast.start_hour}, {forecast.end_hour})"
        )


def mae(truth: PowerSeries, forecast: PowerSeries) -> float:
    """Mean absolute error in MW over aligned hourly series."""
    _check_aligned(truth, forecast)
    return float(np.mean(np.abs(truth.power_mw - forecast.power_mw)))


def nmae(mae_mw: float, mean_generation_mw: float) -> float:
    """MAE as a percentage of mean generation over the evaluation period."""
    if mean_generation_mw <= 0:
        raise ValidationError("mean generation must be positive for NMAE")
    return 100.0 * mae_mw / mean_generation_mw


def aggregate_national(regional: dict[str, PowerSeries]) -> PowerSeries:
    """Pointwise sum of regional series sharing one time axis."""
    if not regional:
        raise ValidationError("no regional series to aggregate")
    series = list(regional.values())
    first = series[0]
    total = np.zeros(len(first), dtype=np.float64)
    for s in series:
        if len(s) != len(first) or s.start_hour != first.start_hour:
            raise ValidationError("regional series do not share a time axis")
        total += s.power_mw
    return PowerSeries(first.hours.copy(), total)

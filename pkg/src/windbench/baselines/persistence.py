"""Persistence baseline: future power equals the last observed power."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ..types import DEFAULT_HORIZONS, ForecastRunIndex, PowerSeries


def _check_horizon(h: int, horizon_set) -> None:
    if h not in tuple(horizon_set):
        raise ValidationError(f"horizon {h} outside horizon set {tuple(horizon_set)}")


def persistence_forecast(observed: PowerSeries, h: int, horizon_set=DEFAULT_HORIZONS) -> PowerSeries:
    """Forecast(t + h) = observed(t) over the observed span itself."""
    _check_horizon(h, horizon_set)
    if len(observed) <= h:
        raise ValidationError(f"series of {len(observed)} hours too short for horizon {h}")
    return PowerSeries(observed.hours[h:], observed.power_mw[:-h].copy())


def persistence_forecast_at(
    observed: PowerSeries, target_hours: np.ndarray, h: int, horizon_set=DEFAULT_HORIZONS
) -> PowerSeries:
    """Persistence forecast for explicit target hours.

    Targets at the start of a test period read the last observations before
    it, so `observed` must cover [targets - h].
    """
    _check_horizon(h, horizon_set)
    hours = np.asarray(target_hours, dtype=np.int64)
    values = np.array([observed.value_at(int(t) - h) for t in hours])
    return PowerSeries(hours, values)


def persistence_from_runs(
    observed: PowerSeries, target_hours: np.ndarray, run_index: ForecastRunIndex | None = None
) -> PowerSeries:
    """Operational persistence pooled over lead times 1..6.

    Each target hour is served by its most recent forecast run; persistence
    issued at the run time predicts the power observed then, so the lead
    time cycles through the horizon set exactly as the map models' inputs do.
    """
    idx = run_index or ForecastRunIndex()
    hours = np.asarray(target_hours, dtype=np.int64)
    values = np.array([observed.value_at(idx.run_for(int(t))) for t in hours])
    return PowerSeries(hours, values)

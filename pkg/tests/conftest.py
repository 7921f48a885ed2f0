import numpy as np
import pytest

from windbench import synthgen, timeutil
from windbench.types import CapacityEntry, Farm, MapSeries, PowerSeries, RegionSpec


@pytest.fixture
def hours_2020():
    start = timeutil.date_to_hour(2020)
    return start


def make_power(start_hour: int, values) -> PowerSeries:
    values = np.asarray(values, dtype=np.float64)
    return PowerSeries(start_hour + np.arange(len(values), dtype=np.int64), values)


def make_maps(values, start_hour: int = 0) -> MapSeries:
    return MapSeries(np.asarray(values, dtype=np.float32), start_hour=start_hour)


def quarter_entries(year: int, installed, quarters: int = 4):
    """Capacity entries for `quarters` consecutive quarters starting at `year`."""
    if np.isscalar(installed):
        installed = [installed] * quarters
    months = [1, 4, 7, 10, 1, 4, 7, 10]
    entries = []
    for i in range(quarters):
        y = year + (i // 4)
        entries.append(
            CapacityEntry(timeutil.date_to_hour(y, months[i % 4], 1), float(installed[i]))
        )
    return tuple(entries)


def single_farm_region(
    region_id="R0", x=5.0, y=5.0, capacity_mw=10.0, year=2020, installed=None
) -> RegionSpec:
    installed = capacity_mw if installed is None else installed
    return RegionSpec(
        region_id,
        (Farm(x, y, capacity_mw),),
        quarter_entries(year, installed),
    )


@pytest.fixture
def small_dataset():
    """2 regions, 16x16 grid, one year of hourly data, deterministic."""
    cfg = synthgen.BenchmarkConfig(
        n_regions=2,
        farms_per_region=2,
        rows=16,
        cols=16,
        start_year=2020,
        end_year=2020,
        noise_std_mw=0.0,
        seed=123,
    )
    return synthgen.generate_benchmark(cfg)

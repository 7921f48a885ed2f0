import numpy as np
import pytest

from windbench import timeutil
from windbench.errors import ValidationError
from windbench.types import (
    CapacityEntry,
    Dataset,
    Farm,
    ForecastRunIndex,
    MapSeries,
    PowerSeries,
    RegionSpec,
)

from conftest import make_maps, make_power, quarter_entries, single_farm_region


class TestMapSeries:
    def test_accepts_valid_stack(self):
        s = make_maps(np.ones((3, 4, 5)), start_hour=100)
        assert s.steps == 3 and s.rows == 4 and s.cols == 5
        assert list(s.hours()) == [100, 101, 102]

    def test_rejects_negative_speeds(self):
        with pytest.raises(ValidationError):
            make_maps(-np.ones((2, 2, 2)))

    def test_rejects_nan(self):
        values = np.ones((2, 2, 2))
        values[0, 0, 0] = np.nan
        with pytest.raises(ValidationError):
            make_maps(values)

    def test_rejects_tiny_grid(self):
        with pytest.raises(ValidationError):
            make_maps(np.ones((2, 1, 5)))

    def test_slice_hours(self):
        s = make_maps(np.arange(24).reshape(6, 2, 2), start_hour=10)
        part = s.slice_hours(12, 14)
        assert part.steps == 2 and part.start_hour == 12
        assert np.array_equal(part.values, s.values[2:4])


class TestPowerSeries:
    def test_roundtrip_values(self):
        p = make_power(5, [1.0, 2.0, 3.0])
        assert len(p) == 3 and p.value_at(6) == 2.0

    def test_rejects_gap(self):
        with pytest.raises(ValidationError):
            PowerSeries(np.array([0, 1, 3]), np.array([1.0, 2.0, 3.0]))

    def test_rejects_negative_power(self):
        with pytest.raises(ValidationError):
            make_power(0, [1.0, -0.5])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValidationError):
            PowerSeries(np.array([0, 1]), np.array([1.0]))


class TestRegionSpec:
    def test_requires_farm(self):
        with pytest.raises(ValidationError):
            RegionSpec("R", (), quarter_entries(2020, 10.0))

    def test_capacity_must_start_on_quarter(self):
        with pytest.raises(ValidationError):
            CapacityEntry(timeutil.date_to_hour(2020, 2, 1), 10.0)

    def test_farm_bounds_check(self):
        region = single_farm_region(x=20.0, y=5.0)
        with pytest.raises(ValidationError):
            region.check_farms_in_grid(16, 16)

    def test_capacity_coverage_check(self):
        region = single_farm_region(year=2020)
        with pytest.raises(ValidationError):
            region.check_capacity_covers(timeutil.date_to_hour(2019), timeutil.date_to_hour(2021))


class TestDataset:
    def test_rejects_misaligned_power_length(self, small_dataset):
        rid = small_dataset.region_ids[0]
        power = dict(small_dataset.power)
        shorter = power[rid]
        power[rid] = PowerSeries(shorter.hours[:-1], shorter.power_mw[:-1])
        with pytest.raises(ValidationError):
            Dataset(small_dataset.maps, small_dataset.regions, power)

    def test_rejects_bad_horizons(self, small_dataset):
        with pytest.raises(ValidationError):
            Dataset(
                small_dataset.maps,
                small_dataset.regions,
                small_dataset.power,
                horizon_set=(1, 9),
            )


class TestForecastRunIndex:
    def test_every_hour_covered_once_with_lead_1_to_6(self):
        idx = ForecastRunIndex()
        hours = np.arange(timeutil.date_to_hour(2020), timeutil.date_to_hour(2020) + 500)
        leads = idx.leads_for(hours)
        assert leads.min() == 1 and leads.max() == 6
        for t in hours[:60]:
            run = idx.run_for(int(t))
            assert run % 6 == 0
            assert 1 <= int(t) - run <= 6
            # the next run would be issued after t, so coverage is unique
            assert run + 6 >= int(t)

    def test_run_boundary(self):
        idx = ForecastRunIndex()
        assert idx.run_for(6) == 0 and idx.lead_for(6) == 6
        assert idx.run_for(7) == 6 and idx.lead_for(7) == 1

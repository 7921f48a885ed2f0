import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windbench import synthgen, timeutil
from windbench.errors import ValidationError
from windbench.synthgen import (
    BenchmarkConfig,
    FieldParams,
    TurbineParams,
    bilinear_sample,
    generate_benchmark,
    generate_wind_fields,
    power_curve,
    synthesize_power,
)
from windbench.types import Farm, RegionSpec

from conftest import make_maps, quarter_entries, single_farm_region

TURBINE = TurbineParams(cut_in=3.0, rated=12.0, cut_out=25.0)


class TestWindFields:
    def test_zero_variance_gives_constant_field(self):
        params = FieldParams(mean_speed=8.0, std_speed=0.0, rng_seed=1)
        series = generate_wind_fields((10, 4, 4), params)
        assert np.all(series.values == np.float32(8.0))

    def test_same_seed_bit_identical(self):
        params = FieldParams(rng_seed=42)
        a = generate_wind_fields((50, 8, 8), params)
        b = generate_wind_fields((50, 8, 8), params)
        assert np.array_equal(a.values, b.values)

    def test_monte_carlo_moments_and_autocorrelation(self):
        params = FieldParams(
            mean_speed=7.5, std_speed=2.5, spatial_smoothing_cells=1.0,
            temporal_ar1=0.8, rng_seed=7,
        )
        series = generate_wind_fields((5000, 8, 8), params)
        values = series.values.astype(np.float64)
        assert abs(values.mean() - 7.5) < 0.1
        avg = values.mean(axis=(1, 2))
        centered = avg - avg.mean()
        lag1 = float(
            (centered[1:] * centered[:-1]).sum()
            / np.sqrt((centered[1:] ** 2).sum() * (centered[:-1] ** 2).sum())
        )
        assert abs(lag1 - 0.8) < 0.05

    def test_invalid_params_rejected(self):
        with pytest.raises(ValidationError):
            FieldParams(mean_speed=0.0)
        with pytest.raises(ValidationError):
            FieldParams(temporal_ar1=1.0)


class TestPowerCurve:
    def test_below_cut_in_is_zero(self):
        assert power_curve(2.0, TURBINE) == 0.0

    def test_rated_point_is_one(self):
        assert power_curve(12.0, TURBINE) == 1.0

    def test_cubic_ramp_value(self):
        # (7.5^3 - 3^3) / (12^3 - 3^3) = 394.875 / 1701
        expected = 394.875 / 1701.0
        assert power_curve(7.5, TURBINE) == pytest.approx(expected, abs=1e-9)
        assert round(expected, 5) == 0.23214

    def test_cut_out_drop(self):
        assert power_curve(24.999, TURBINE) == 1.0
        assert power_curve(25.0, TURBINE) == 0.0
        assert power_curve(30.0, TURBINE) == 0.0

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.0, 24.99), st.floats(0.0, 24.99))
    def test_monotone_below_cut_out(self, a, b):
        lo, hi = sorted((a, b))
        assert power_curve(lo, TURBINE) <= power_curve(hi, TURBINE)

    def test_bad_turbine_rejected(self):
        with pytest.raises(ValidationError):
            TurbineParams(cut_in=5.0, rated=4.0, cut_out=25.0)


class TestSynthesizePower:
    def test_rated_wind_gives_full_capacity(self):
        maps = make_maps(np.full((5, 8, 8), 12.0))
        region = single_farm_region(x=3.0, y=4.0, capacity_mw=10.0, year=1970)
        power = synthesize_power(maps, region, TURBINE, noise_std_mw=0.0)
        assert np.all(power.power_mw == 10.0)

    def test_below_cut_in_gives_zero(self):
        maps = make_maps(np.full((5, 8, 8), 2.0))
        region = single_farm_region(x=3.0, y=4.0, capacity_mw=10.0, year=1970)
        power = synthesize_power(maps, region, TURBINE, noise_std_mw=0.0)
        assert np.all(power.power_mw == 0.0)

    def test_bilinear_midpoint(self):
        grid = np.full((4, 4), 4.0, dtype=np.float64)
        grid[1, 2] = 8.0  # same row, neighboring column
        assert bilinear_sample(grid, 1.5, 1.0) == pytest.approx(6.0)

    def test_two_farms_equal_sum_of_singles(self):
        rng = np.random.default_rng(3)
        maps = make_maps(rng.uniform(0, 20, size=(48, 8, 8)))
        farm_a = Farm(2.3, 4.1, 7.0)
        farm_b = Farm(5.6, 1.9, 12.0)
        capacity = quarter_entries(1970, 19.0)
        both = RegionSpec("AB", (farm_a, farm_b), capacity)
        only_a = RegionSpec("A", (farm_a,), capacity)
        only_b = RegionSpec("B", (farm_b,), capacity)
        p_both = synthesize_power(maps, both, TURBINE, noise_std_mw=0.0)
        p_a = synthesize_power(maps, only_a, TURBINE, noise_std_mw=0.0)
        p_b = synthesize_power(maps, only_b, TURBINE, noise_std_mw=0.0)
        assert np.allclose(p_both.power_mw, p_a.power_mw + p_b.power_mw, atol=2e-3)

    def test_never_exceeds_capacity_without_noise(self):
        rng = np.random.default_rng(9)
        maps = make_maps(rng.uniform(0, 40, size=(200, 8, 8)))
        region = RegionSpec(
            "R", (Farm(1.0, 1.0, 5.0), Farm(6.0, 6.0, 15.0)), quarter_entries(1970, 20.0)
        )
        power = synthesize_power(maps, region, TURBINE, noise_std_mw=0.0)
        assert power.power_mw.max() <= 20.0

    def test_out_of_bounds_farm_rejected(self):
        maps = make_maps(np.ones((2, 4, 4)))
        region = single_farm_region(x=9.0, y=1.0, year=1970)
        with pytest.raises(ValidationError):
            synthesize_power(maps, region, TURBINE)

    def test_deterministic_noise(self):
        maps = make_maps(np.full((20, 4, 4), 9.0))
        region = single_farm_region(x=2.0, y=2.0, year=1970)
        a = synthesize_power(maps, region, TURBINE, noise_std_mw=1.0, seed=5)
        b = synthesize_power(maps, region, TURBINE, noise_std_mw=1.0, seed=5)
        assert np.array_equal(a.power_mw, b.power_mw)


class TestGenerateBenchmark:
    def test_single_region_single_farm_is_valid(self):
        cfg = BenchmarkConfig(
            n_regions=1, farms_per_region=1, rows=8, cols=8,
            start_year=2020, end_year=2020, seed=1,
        )
        dataset = generate_benchmark(cfg)
        dataset.validate()
        assert dataset.region_ids == ["R0"]

    def test_fixed_seed_identical_dataset(self):
        cfg = BenchmarkConfig(
            n_regions=2, farms_per_region=2, rows=16, cols=16,
            start_year=2020, end_year=2020, seed=77,
        )
        a = generate_benchmark(cfg)
        b = generate_benchmark(cfg)
        assert np.array_equal(a.maps.values, b.maps.values)
        assert a.regions == b.regions
        for rid in a.region_ids:
            assert np.array_equal(a.power[rid].power_mw, b.power[rid].power_mw)

    def test_desk_scale_step_count(self):
        # hourly 2018-2020 inclusive: 8760 + 8760 + 8784
        cfg = BenchmarkConfig(n_regions=1, farms_per_region=1, rows=8, cols=8,
                              start_year=2018, end_year=2020, seed=0)
        dataset = generate_benchmark(cfg)
        assert dataset.maps.steps == 26304
        assert dataset.maps.start_hour == timeutil.date_to_hour(2018)

    def test_infeasible_layout_rejected(self):
        with pytest.raises(ValidationError):
            generate_benchmark(
                BenchmarkConfig(n_regions=16, farms_per_region=1, rows=8, cols=8,
                                start_year=2020, end_year=2020)
            )

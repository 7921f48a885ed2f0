import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windbench import formats, timeutil
from windbench.errors import FormatError, ValidationError
from windbench.types import MapSeries, PowerSeries

from conftest import make_maps, make_power


class TestMapStack:
    def test_round_trip_identity(self, tmp_path):
        values = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
        series = MapSeries(values, start_hour=420768)
        path = tmp_path / "maps.wdgs"
        formats.write_map_stack(series, path)
        loaded = formats.read_map_stack(path)
        assert loaded.start_hour == series.start_hour
        assert np.array_equal(loaded.values, values)

    def test_bad_magic_reports_offset(self, tmp_path):
        path = tmp_path / "maps.wdgs"
        formats.write_map_stack(make_maps(np.ones((1, 2, 2))), path)
        data = bytearray(path.read_bytes())
        data[0:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(FormatError, match="at byte 0"):
            formats.read_map_stack(path)

    def test_truncated_payload_reports_offset(self, tmp_path):
        path = tmp_path / "maps.wdgs"
        formats.write_map_stack(make_maps(np.ones((2, 2, 2))), path)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(FormatError, match="truncated payload"):
            formats.read_map_stack(path)

    def test_dimension_error_reports_offset(self, tmp_path):
        path = tmp_path / "maps.wdgs"
        formats.write_map_stack(make_maps(np.ones((1, 2, 2))), path)
        data = bytearray(path.read_bytes())
        data[10:14] = (1).to_bytes(4, "little")  # rows = 1
        path.write_bytes(bytes(data))
        with pytest.raises(FormatError, match="at byte 10"):
            formats.read_map_stack(path)

    def test_rewrite_is_byte_identical(self, tmp_path):
        rng = np.random.default_rng(0)
        series = make_maps(rng.uniform(0, 30, size=(1000, 32, 32)).astype(np.float32))
        first, second = tmp_path / "a.wdgs", tmp_path / "b.wdgs"
        formats.write_map_stack(series, first)
        formats.write_map_stack(formats.read_map_stack(first), second)
        digest = lambda p: hashlib.sha256(p.read_bytes()).hexdigest()
        assert digest(first) == digest(second)

    @settings(max_examples=100, deadline=None)
    @given(
        t=st.integers(1, 4),
        m=st.integers(2, 5),
        n=st.integers(2, 5),
        start=st.integers(0, 10**6),
        seed=st.integers(0, 2**31),
    )
    def test_round_trip_property(self, tmp_path_factory, t, m, n, start, seed):
        rng = np.random.default_rng(seed)
        series = MapSeries(
            rng.uniform(0, 40, size=(t, m, n)).astype(np.float32), start_hour=start
        )
        path = tmp_path_factory.mktemp("wdgs") / "s.wdgs"
        formats.write_map_stack(series, path)
        loaded = formats.read_map_stack(path)
        assert loaded.start_hour == start
        assert np.array_equal(loaded.values, series.values)


class TestPowerCsv:
    def test_two_rows(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text(
            "timestamp,power_mw\n"
            "2020-01-01T00:00:00Z,10.000\n"
            "2020-01-01T01:00:00Z,20.500\n"
        )
        series = formats.read_power_csv(path)
        assert len(series) == 2
        assert series.power_mw[1] == 20.5
        assert series.start_hour == timeutil.date_to_hour(2020)

    def test_gap_lists_missing_hour(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text(
            "timestamp,power_mw\n"
            "2020-01-01T00:00:00Z,1.000\n"
            "2020-01-01T02:00:00Z,2.000\n"
        )
        with pytest.raises(ValidationError, match="2020-01-01T01:00:00Z"):
            formats.read_power_csv(path)

    def test_negative_power_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("timestamp,power_mw\n2020-01-01T00:00:00Z,-1.0\n")
        with pytest.raises(ValidationError, match="negative"):
            formats.read_power_csv(path)

    def test_leap_year_row_count(self, tmp_path):
        start = timeutil.date_to_hour(2020)
        series = make_power(start, np.round(np.random.default_rng(1).uniform(0, 99, 8784), 3))
        path = tmp_path / "leap.csv"
        formats.write_power_csv(series, path)
        loaded = formats.read_power_csv(path)
        assert len(loaded) == 8784  # 2020 is a leap year
        assert np.array_equal(loaded.power_mw, series.power_mw)

    @settings(max_examples=100, deadline=None)
    @given(
        n=st.integers(1, 40),
        start=st.integers(0, 10**6),
        seed=st.integers(0, 2**31),
    )
    def test_round_trip_property(self, tmp_path_factory, n, start, seed):
        rng = np.random.default_rng(seed)
        # format contract: at most 3 fractional digits
        series = make_power(start, np.round(rng.uniform(0, 5000, size=n), 3))
        path = tmp_path_factory.mktemp("csv") / "p.csv"
        formats.write_power_csv(series, path)
        loaded = formats.read_power_csv(path)
        assert np.array_equal(loaded.hours, series.hours)
        assert np.array_equal(loaded.power_mw, series.power_mw)


class TestRegionManifestAndDataset:
    def test_manifest_round_trip(self, tmp_path, small_dataset):
        region = small_dataset.regions[0]
        path = tmp_path / "r.json"
        formats.write_region_manifest(region, path)
        loaded = formats.read_region_manifest(path)
        assert loaded == region

    def test_dataset_round_trip(self, tmp_path, small_dataset):
        formats.save_dataset(small_dataset, tmp_path / "ds")
        loaded = formats.load_dataset(tmp_path / "ds")
        assert loaded.region_ids == small_dataset.region_ids
        assert np.array_equal(loaded.maps.values, small_dataset.maps.values)
        for rid in loaded.region_ids:
            assert np.array_equal(
                loaded.power[rid].power_mw, small_dataset.power[rid].power_mw
            )

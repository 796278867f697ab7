from datetime import date, datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aquasampler.domain import (
    CheckStatus,
    DomainError,
    Registry,
    SamplingMethod,
    SamplingPoint,
    SamplingTask,
    SamplingZone,
    UnknownStatus,
    WaterType,
    compare_status,
    format_timestamp,
    load_registry,
    make_task_id,
    parse_check_status,
    parse_date,
    parse_timestamp,
    save_registry,
)


class TestCheckStatus:
    def test_parse_canonical(self):
        assert parse_check_status("Untouched") is CheckStatus.UNTOUCHED

    def test_parse_case_insensitive(self):
        assert parse_check_status("completed") is CheckStatus.COMPLETED
        assert parse_check_status("PARTIAL") is CheckStatus.PARTIAL

    def test_parse_unknown(self):
        with pytest.raises(UnknownStatus):
            parse_check_status("Done")

    @pytest.mark.parametrize("status", list(CheckStatus))
    def test_parse_roundtrip(self, status):
        assert parse_check_status(status.value) is status

    def test_compare_order(self):
        assert compare_status(CheckStatus.UNTOUCHED, CheckStatus.PARTIAL) < 0
        assert compare_status(CheckStatus.COMPLETED, CheckStatus.COMPLETED) == 0
        assert compare_status(CheckStatus.COMPLETED, CheckStatus.UNTOUCHED) > 0

    @given(st.sampled_from(list(CheckStatus)), st.sampled_from(list(CheckStatus)))
    def test_compare_matches_rank(self, a, b):
        assert compare_status(a, b) == (a.rank > b.rank) - (a.rank < b.rank)
        assert (a < b) == (compare_status(a, b) < 0)


class TestTimestamps:
    def test_format_parse_roundtrip(self):
        ts = datetime(2024, 3, 5, 8, 30, 17, tzinfo=timezone.utc)
        assert parse_timestamp(format_timestamp(ts)) == ts

    def test_parse_offset_normalized(self):
        assert parse_timestamp("2024-03-05T09:30:00+01:00") == parse_timestamp(
            "2024-03-05T08:30:00Z"
        )

    def test_naive_rejected(self):
        with pytest.raises(DomainError):
            parse_timestamp("2024-03-05T08:30:00")

    def test_date_strict(self):
        assert parse_date("2024-03-05") == date(2024, 3, 5)
        for bad in ("05/03/2024", "2024-3-5", "2024-03-05T00:00:00"):
            with pytest.raises(DomainError):
                parse_date(bad)


class TestTask:
    def test_completed_requires_execution_time(self):
        with pytest.raises(DomainError):
            SamplingTask(
                task_id="t",
                point_id="p",
                method_id="m",
                execution_date=date(2024, 3, 5),
                status=CheckStatus.COMPLETED,
            )
        with pytest.raises(DomainError):
            SamplingTask(
                task_id="t",
                point_id="p",
                method_id="m",
                execution_date=date(2024, 3, 5),
                execution_time=datetime(2024, 3, 5, tzinfo=timezone.utc),
            )

    def test_negative_version_rejected(self):
        with pytest.raises(DomainError):
            SamplingTask(
                task_id="t",
                point_id="p",
                method_id="m",
                execution_date=date(2024, 3, 5),
                version=-1,
            )

    def test_task_id_derivation(self):
        assert make_task_id("P-101", "M-STD", date(2024, 3, 5)) == "P-101-M-STD-2024-03-05"


class TestRegistry:
    def test_point_requires_known_zone(self):
        registry = Registry()
        with pytest.raises(DomainError):
            registry.add_point(
                SamplingPoint("P-1", "Z-X", (0.5, 0.5), WaterType.PURIFIED_WATER)
            )

    def test_coords_bounds(self):
        with pytest.raises(DomainError):
            SamplingPoint("P-1", "Z-A", (1.5, 0.5), WaterType.PURIFIED_WATER)

    def test_duplicate_ids_rejected(self):
        registry = Registry()
        registry.add_zone(SamplingZone("Z-A", "A"))
        with pytest.raises(DomainError):
            registry.add_zone(SamplingZone("Z-A", "again"))

    def test_method_needs_steps(self):
        with pytest.raises(DomainError):
            SamplingMethod("M-X", key_steps=())

    def test_save_load_roundtrip(self, registry, tmp_path):
        save_registry(registry, tmp_path)
        loaded = load_registry(tmp_path)
        assert loaded.zones == registry.zones
        assert loaded.points == registry.points
        assert loaded.methods == registry.methods

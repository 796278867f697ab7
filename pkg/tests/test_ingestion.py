import random
from datetime import date

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aquasampler import fixtures
from aquasampler.domain import CheckStatus, Worksheet
from aquasampler.ingestion import (
    COL_DATE,
    COL_METHOD,
    COL_POINT,
    COL_ZONE,
    DELIMITER,
    MalformedHeader,
    MalformedLabel,
    REASON_BAD_DATE,
    REASON_DUPLICATE_TASK,
    REASON_UNKNOWN_METHOD,
    REASON_UNKNOWN_POINT,
    REASON_UNKNOWN_ZONE,
    REASON_ZONE_MISMATCH,
    SampleLabel,
    WorksheetFormat,
    decode_sample_label,
    encode_sample_label,
    export_worksheet,
    filter_by_date,
    parse_worksheet,
    validate_records,
)

from conftest import DAY

HEADER = DELIMITER.join((COL_ZONE, COL_METHOD, COL_POINT, COL_DATE))


def sheet(*rows: tuple[str, str, str, str]) -> bytes:
    lines = [HEADER] + [DELIMITER.join(row) for row in rows]
    return ("\n".join(lines) + "\n").encode()


class TestParse:
    def test_count_preserved(self, registry):
        data = fixtures.demo_worksheet_text(DAY).encode()
        records = parse_worksheet(data)
        assert len(records) == 7

    def test_missing_header_column(self):
        data = (DELIMITER.join((COL_ZONE, COL_METHOD, COL_DATE)) + "\nZ-A;M-STD;2024-03-05\n").encode()
        with pytest.raises(MalformedHeader):
            parse_worksheet(data)

    def test_empty_body_ok(self):
        assert parse_worksheet((HEADER + "\n").encode()) == []

    def test_row_numbers_count_header(self):
        records = parse_worksheet(sheet(("Z-A", "M-STD", "P-101", "2024-03-05")))
        assert records[0].row_number == 2

    def test_extra_columns_pass_through(self):
        header = HEADER + DELIMITER + "Remark"
        data = (header + "\nZ-A;M-STD;P-101;2024-03-05;keep me\n").encode()
        [record] = parse_worksheet(data)
        assert record.get("Remark") == "keep me"

    def test_quoted_delimiter(self):
        data = (HEADER + '\n"Z-A";M-STD;P-101;2024-03-05\n').encode()
        [record] = parse_worksheet(data)
        assert record.get(COL_ZONE) == "Z-A"

    def test_structured_records(self):
        data = b'[{"Sampling Zone": "Z-A", "Sampling Method": "M-STD", "Sampling Point": "P-101", "Sampling Execution Date": "2024-03-05"}]'
        records = parse_worksheet(data, WorksheetFormat.STRUCTURED_RECORDS)
        assert records[0].get(COL_POINT) == "P-101"

    def test_structured_must_be_array(self):
        with pytest.raises(MalformedHeader):
            parse_worksheet(b'{"rows": []}', WorksheetFormat.STRUCTURED_RECORDS)


class TestValidate:
    def test_partial_acceptance(self, registry):
        rows = [("Z-A", "M-STD", "P-101", "2024-03-05"),
                ("Z-A", "M-STD", "P-999", "2024-03-05"),
                ("Z-A", "M-STD", "P-102", "2024-03-05")]
        tasks, report = validate_records(parse_worksheet(sheet(*rows)), registry)
        assert len(tasks) == 2
        assert report.rejected == ((3, REASON_UNKNOWN_POINT),)
        assert report.accepted_count + len(report.rejected) == 3

    def test_duplicate_task(self, registry):
        rows = [("Z-A", "M-STD", "P-101", "2024-03-05"),
                ("Z-A", "M-STD", "P-101", "2024-03-05")]
        tasks, report = validate_records(parse_worksheet(sheet(*rows)), registry)
        assert len(tasks) == 1
        assert report.rejected == ((3, REASON_DUPLICATE_TASK),)

    @pytest.mark.parametrize(
        "row,reason",
        [
            (("Z-X", "M-STD", "P-101", "2024-03-05"), REASON_UNKNOWN_ZONE),
            (("Z-A", "M-NOPE", "P-101", "2024-03-05"), REASON_UNKNOWN_METHOD),
            (("Z-A", "M-STD", "P-404", "2024-03-05"), REASON_UNKNOWN_POINT),
            (("Z-B", "M-STD", "P-101", "2024-03-05"), REASON_ZONE_MISMATCH),
            (("Z-A", "M-STD", "P-101", "05/03/2024"), REASON_BAD_DATE),
        ],
    )
    def test_rejection_reasons(self, registry, row, reason):
        tasks, report = validate_records(parse_worksheet(sheet(row)), registry)
        assert tasks == []
        assert report.rejected == ((2, reason),)

    def test_tasks_start_untouched_v0(self, registry):
        tasks, _ = validate_records(
            parse_worksheet(sheet(("Z-A", "M-STD", "P-101", "2024-03-05"))), registry
        )
        [task] = tasks
        assert task.status is CheckStatus.UNTOUCHED
        assert task.version == 0
        assert task.task_id == "P-101-M-STD-2024-03-05"

    def test_source_date_single(self, registry):
        tasks, report = validate_records(
            parse_worksheet(fixtures.demo_worksheet_text(DAY).encode()), registry
        )
        assert report.source_date == DAY

    def test_source_date_mixed_is_none(self, registry):
        rows = [("Z-A", "M-STD", "P-101", "2024-03-05"),
                ("Z-A", "M-STD", "P-102", "2024-03-06")]
        _, report = validate_records(parse_worksheet(sheet(*rows)), registry)
        assert report.source_date is None

    def test_determinism(self, registry):
        data = sheet(("Z-A", "M-STD", "P-101", "2024-03-05"),
                     ("Z-X", "M-STD", "P-101", "2024-03-05"))
        first = validate_records(parse_worksheet(data), registry)
        second = validate_records(parse_worksheet(data), registry)
        assert first == second

    @given(st.integers(min_value=0, max_value=60), st.randoms(use_true_random=False))
    def test_counts_always_reconcile(self, n_rows, rng):
        registry = fixtures.build_registry()
        points = list(registry.points) + ["P-404", ""]
        methods = list(registry.methods) + ["M-?" ]
        rows = []
        for _ in range(n_rows):
            point = rng.choice(points)
            zone = registry.points[point].zone_id if point in registry.points else "Z-A"
            rows.append(
                (
                    rng.choice([zone, "Z-X"]),
                    rng.choice(methods),
                    point,
                    rng.choice(["2024-03-05", "garbage"]),
                )
            )
        tasks, report = validate_records(parse_worksheet(sheet(*rows)), registry)
        assert report.accepted_count == len(tasks)
        assert report.accepted_count + len(report.rejected) == n_rows


class TestFilterAndExport:
    def test_filter_by_date(self, demo_tasks):
        other_day = date(2024, 3, 6)
        assert filter_by_date(demo_tasks, other_day) == []
        assert filter_by_date(demo_tasks, DAY) == demo_tasks

    def test_export_columns_and_order(self, registry, demo_tasks):
        data = export_worksheet(Worksheet(DAY, tuple(demo_tasks)), registry)
        lines = data.decode().strip().splitlines()
        assert lines[0] == DELIMITER.join(
            (COL_ZONE, COL_METHOD, COL_POINT, COL_DATE, "Check Status", "Execution Time")
        )
        zones = [line.split(DELIMITER)[0] for line in lines[1:]]
        assert zones == sorted(zones)

    def test_export_empty_worksheet(self, registry):
        data = export_worksheet(Worksheet(DAY, ()), registry)
        assert len(data.decode().strip().splitlines()) == 1

    def test_export_one_completed_one_execution_time(self, registry, demo_tasks):
        from dataclasses import replace
        from datetime import datetime, timezone

        stamped = replace(
            demo_tasks[0],
            status=CheckStatus.COMPLETED,
            execution_time=datetime(2024, 3, 5, 8, 0, tzinfo=timezone.utc),
        )
        tasks = (stamped,) + tuple(demo_tasks[1:3])
        data = export_worksheet(Worksheet(DAY, tasks), registry)
        lines = data.decode().strip().splitlines()
        assert len(lines) == 4
        times = [line.split(DELIMITER)[5] for line in lines[1:]]
        assert sum(1 for t in times if t) == 1
        assert "2024-03-05T08:00:00Z" in times

    def test_roundtrip_preserves_identities(self, registry, demo_tasks):
        exported = export_worksheet(Worksheet(DAY, tuple(demo_tasks)), registry)
        tasks, report = validate_records(parse_worksheet(exported), registry)
        assert not report.rejected
        assert sorted(t.task_id for t in tasks) == sorted(t.task_id for t in demo_tasks)
        # statuses are reset on ingest: check-in state belongs to the engine
        assert all(t.status is CheckStatus.UNTOUCHED for t in tasks)


class TestLabels:
    def test_decode_example(self):
        label = decode_sample_label("VEV/Z-A/P-101/2024-03-05/2")
        assert label == SampleLabel("VEV", "Z-A", "P-101", date(2024, 3, 5), 2)

    def test_missing_segment(self):
        with pytest.raises(MalformedLabel) as err:
            decode_sample_label("VEV/Z-A/P-101")
        assert err.value.segment == 4

    def test_zero_sequence(self):
        with pytest.raises(MalformedLabel) as err:
            decode_sample_label("VEV/Z-A/P-101/2024-03-05/0")
        assert err.value.segment == 5

    def test_empty_segment(self):
        with pytest.raises(MalformedLabel) as err:
            decode_sample_label("VEV//P-101/2024-03-05/1")
        assert err.value.segment == 2

    def test_too_many_segments(self):
        with pytest.raises(MalformedLabel):
            decode_sample_label("VEV/Z-A/P-101/2024-03-05/1/9")

    def test_bad_date_segment(self):
        with pytest.raises(MalformedLabel) as err:
            decode_sample_label("VEV/Z-A/P-101/05-03-2024/1")
        assert err.value.segment == 4

    token = st.text(
        alphabet=st.characters(whitelist_categories=("Lu", "Nd"), whitelist_characters="-"),
        min_size=1,
        max_size=8,
    )

    @given(
        site=token,
        zone=token,
        point=token,
        day=st.dates(min_value=date(2000, 1, 1), max_value=date(2099, 12, 31)),
        seq=st.integers(min_value=1, max_value=9999),
    )
    def test_encode_decode_identity(self, site, zone, point, day, seq):
        label = SampleLabel(site, zone, point, day, seq)
        assert decode_sample_label(encode_sample_label(label)) == label

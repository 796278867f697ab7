"""Worksheet ingestion: parse LIMS exports, validate rows, export back out.

Worksheet files are UTF-8 delimited text using ``;`` (decimal commas are
common at the facility) with RFC 4180-style quoting, or JSON arrays of row
objects. The header must carry the four required columns; any extra columns
are preserved verbatim as opaque pass-through fields. Check-in state is
owned by the workflow engine, so ingestion always resets statuses.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Iterable, Optional, Sequence

from .domain import (
    DomainError,
    Registry,
    SamplingMethod,
    SamplingTask,
    Worksheet,
    format_timestamp,
    make_task_id,
    parse_date,
)

DELIMITER = ";"

COL_ZONE = "Sampling Zone"
COL_METHOD = "Sampling Method"
COL_POINT = "Sampling Point"
COL_DATE = "Sampling Execution Date"
COL_STATUS = "Check Status"
COL_TIME = "Execution Time"

REQUIRED_COLUMNS = (COL_ZONE, COL_METHOD, COL_POINT, COL_DATE)
EXPORT_COLUMNS = REQUIRED_COLUMNS + (COL_STATUS, COL_TIME)


class IngestionError(Exception):
    pass


class MalformedHeader(IngestionError):
    pass


class MalformedLabel(IngestionError):
    def __init__(self, segment: int, message: str) -> None:
        super().__init__(f"segment {segment}: {message}")
        self.segment = segment


class WorksheetFormat(str, Enum):
    DELIMITED_TEXT = "DelimitedText"
    STRUCTURED_RECORDS = "StructuredRecords"


# Row-level rejection reasons (closed vocabulary; surfaced in reports and API).
REASON_MISSING_FIELD = "MissingField"
REASON_UNKNOWN_ZONE = "UnknownZone"
REASON_UNKNOWN_POINT = "UnknownPoint"
REASON_UNKNOWN_METHOD = "UnknownMethod"
REASON_ZONE_MISMATCH = "ZoneMismatch"
REASON_BAD_DATE = "BadDate"
REASON_DUPLICATE_TASK = "DuplicateTask"


@dataclass(frozen=True)
class WorksheetRecord:
    """One raw row keyed by column name, tagged with its source row number."""

    row_number: int
    values: tuple[tuple[str, str], ...]

    def get(self, column: str) -> str:
        for key, value in self.values:
            if key == column:
                return value
        return ""

    def as_dict(self) -> dict[str, str]:
        return dict(self.values)


@dataclass(frozen=True)
class IngestReport:
    accepted_count: int
    rejected: tuple[tuple[int, str], ...]
    source_date: Optional[date]

    @property
    def total(self) -> int:
        return self.accepted_count + len(self.rejected)


@dataclass(frozen=True)
class SampleLabel:
    """Decoded bottle label: SITE/ZONE/POINT/DATE/SEQ."""

    site: str
    zone_id: str
    point_id: str
    date: date
    sequence: int


def parse_worksheet(data: bytes, fmt: WorksheetFormat = WorksheetFormat.DELIMITED_TEXT) -> list[WorksheetRecord]:
    """Split a worksheet export into raw records.

    Row-level problems are deferred to :func:`validate_records`; only a
    missing or broken header is rejected here.
    """
    text = data.decode("utf-8")
    if fmt is WorksheetFormat.STRUCTURED_RECORDS:
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedHeader(f"bad structured worksheet: {exc}") from None
        if not isinstance(rows, list):
            raise MalformedHeader("structured worksheet must be a JSON array of row objects")
        records = []
        for index, row in enumerate(rows, start=1):
            if not isinstance(row, dict):
                raise MalformedHeader(f"row {index} is not an object")
            records.append(
                WorksheetRecord(index, tuple((str(k), str(v)) for k, v in row.items()))
            )
        return records

    reader = csv.reader(io.StringIO(text), delimiter=DELIMITER)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedHeader("empty worksheet: header row required") from None
    header = [h.strip() for h in header]
    missing = [col for col in REQUIRED_COLUMNS if col not in header]
    if missing:
        raise MalformedHeader(f"missing required columns: {', '.join(missing)}")
    records = []
    for line_number, cells in enumerate(reader, start=2):
        if not cells or all(not cell.strip() for cell in cells):
            continue
        padded = list(cells) + [""] * (len(header) - len(cells))
        values = tuple(zip(header, (cell.strip() for cell in padded)))
        records.append(WorksheetRecord(line_number, values))
    return records


def validate_records(
    records: Iterable[WorksheetRecord],
    registry: Registry,
    methods: Optional[dict[str, SamplingMethod]] = None,
) -> tuple[list[SamplingTask], IngestReport]:
    """Check rows against the reference data; partial acceptance.

    Valid rows become Untouched version-0 tasks; everything else lands in
    the report with its source row number and a reason code.
    """
    methods = registry.methods if methods is None else methods
    tasks: list[SamplingTask] = []
    rejected: list[tuple[int, str]] = []
    seen_ids: set[str] = set()

    for record in records:
        reason = None
        zone_id = record.get(COL_ZONE)
        method_id = record.get(COL_METHOD)
        point_id = record.get(COL_POINT)
        date_text = record.get(COL_DATE)

        missing = [
            col
            for col, value in (
                (COL_ZONE, zone_id),
                (COL_METHOD, method_id),
                (COL_POINT, point_id),
                (COL_DATE, date_text),
            )
            if not value
        ]
        if missing:
            rejected.append((record.row_number, f"{REASON_MISSING_FIELD}:{missing[0]}"))
            continue

        execution_date: Optional[date] = None
        try:
            execution_date = parse_date(date_text)
        except DomainError:
            reason = REASON_BAD_DATE

        if reason is None and zone_id not in registry.zones:
            reason = REASON_UNKNOWN_ZONE
        if reason is None and point_id not in registry.points:
            reason = REASON_UNKNOWN_POINT
        if reason is None and method_id not in methods:
            reason = REASON_UNKNOWN_METHOD
        if reason is None and registry.points[point_id].zone_id != zone_id:
            reason = REASON_ZONE_MISMATCH

        if reason is None:
            assert execution_date is not None
            task_id = make_task_id(point_id, method_id, execution_date)
            if task_id in seen_ids:
                reason = REASON_DUPLICATE_TASK

        if reason is not None:
            rejected.append((record.row_number, reason))
            continue

        seen_ids.add(task_id)
        tasks.append(
            SamplingTask(
                task_id=task_id,
                point_id=point_id,
                method_id=method_id,
                execution_date=execution_date,
            )
        )

    dates = {task.execution_date for task in tasks}
    source_date = dates.pop() if len(dates) == 1 else None
    report = IngestReport(len(tasks), tuple(rejected), source_date)
    return tasks, report


def filter_by_date(tasks: Sequence[SamplingTask], day: date) -> list[SamplingTask]:
    """Tasks executing on the given day, original order preserved."""
    return [task for task in tasks if task.execution_date == day]


def export_worksheet(worksheet: Worksheet, registry: Registry) -> bytes:
    """Render the checked worksheet back to delimited text.

    Rows are ordered by zone, then point, then method; only Completed tasks
    carry an execution time.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, delimiter=DELIMITER, lineterminator="\n")
    writer.writerow(EXPORT_COLUMNS)

    def sort_key(task: SamplingTask) -> tuple[str, str, str]:
        return (registry.points[task.point_id].zone_id, task.point_id, task.method_id)

    for task in sorted(worksheet.tasks, key=sort_key):
        zone_id = registry.points[task.point_id].zone_id
        execution_time = format_timestamp(task.execution_time) if task.execution_time else ""
        writer.writerow(
            [
                zone_id,
                task.method_id,
                task.point_id,
                task.execution_date.isoformat(),
                task.status.value,
                execution_time,
            ]
        )
    return buffer.getvalue().encode("utf-8")


_SEQ_RE = re.compile(r"^[0-9]+$")


def decode_sample_label(payload: str) -> SampleLabel:
    """Parse a bottle-label payload of the form ``SITE/ZONE/POINT/YYYY-MM-DD/SEQ``."""
    segments = payload.split("/")
    if len(segments) < 5:
        raise MalformedLabel(len(segments) + 1, "missing segment")
    if len(segments) > 5:
        raise MalformedLabel(6, "too many segments")
    for index, segment in enumerate(segments, start=1):
        if not segment:
            raise MalformedLabel(index, "empty segment")
    try:
        label_date = parse_date(segments[3])
    except DomainError:
        raise MalformedLabel(4, f"bad date {segments[3]!r}") from None
    if not _SEQ_RE.match(segments[4]):
        raise MalformedLabel(5, f"bad sequence {segments[4]!r}")
    sequence = int(segments[4])
    if sequence < 1:
        raise MalformedLabel(5, "sequence must be >= 1")
    return SampleLabel(segments[0], segments[1], segments[2], label_date, sequence)


def encode_sample_label(label: SampleLabel) -> str:
    """Inverse formatter for :func:`decode_sample_label`."""
    return "/".join(
        (label.site, label.zone_id, label.point_id, label.date.isoformat(), str(label.sequence))
    )

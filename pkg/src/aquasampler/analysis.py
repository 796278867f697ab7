"""Desk-scale statistics over worksheets, audit trails, and feedback.

Everything here is a pure read over immutable snapshots and the
append-only audit log, so recomputing from the persisted log always equals
the live value.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from datetime import date, datetime
from typing import Iterable, Mapping, Optional, Sequence

from .domain import CheckStatus, FeedbackEntry, Registry, Worksheet
from .workflow import ACTION_CHECK_IN, AuditEvent, AuditOutcome


@dataclass(frozen=True)
class ProgressSnapshot:
    as_of: datetime
    total: int
    by_status: Mapping[str, int]
    completion_rate: float
    by_zone: Mapping[str, float]


@dataclass(frozen=True)
class PerformanceStats:
    window: tuple[Optional[date], Optional[date]]
    total_attempts: int
    rejected_attempts: int
    error_rate: float
    mean_duration: Optional[float]
    median_duration: Optional[float]
    max_duration: Optional[float]


def progress(worksheet: Optional[Worksheet], registry: Registry, as_of: datetime) -> ProgressSnapshot:
    """Status counts and completion rates, overall and per zone.

    An empty worksheet is vacuously complete (rate 1.0) so dashboards never
    divide by zero.
    """
    tasks = worksheet.tasks if worksheet else ()
    by_status = {status.value: 0 for status in CheckStatus}
    zone_totals: dict[str, int] = {}
    zone_completed: dict[str, int] = {}
    for task in tasks:
        by_status[task.status.value] += 1
        zone_id = registry.points[task.point_id].zone_id
        zone_totals[zone_id] = zone_totals.get(zone_id, 0) + 1
        if task.status is CheckStatus.COMPLETED:
            zone_completed[zone_id] = zone_completed.get(zone_id, 0) + 1
    total = len(tasks)
    completed = by_status[CheckStatus.COMPLETED.value]
    completion_rate = completed / total if total else 1.0
    by_zone = {
        zone: zone_completed.get(zone, 0) / count for zone, count in sorted(zone_totals.items())
    }
    return ProgressSnapshot(as_of, total, by_status, completion_rate, by_zone)


def _in_window(event: AuditEvent, window: tuple[Optional[date], Optional[date]]) -> bool:
    start, end = window
    day = event.timestamp.date()
    if start is not None and day < start:
        return False
    if end is not None and day > end:
        return False
    return True


def performance(
    events: Sequence[AuditEvent],
    window: tuple[Optional[date], Optional[date]] = (None, None),
) -> PerformanceStats:
    """Error rate and task durations over a date window.

    A task's duration runs from its first accepted check-in to the check-in
    that completed it (single-event completions are zero). The error rate is
    rejected attempts over all audited attempts in the window; with no
    attempts it is 0 and the duration stats stay empty.
    """
    in_window = [e for e in events if _in_window(e, window)]
    total = len(in_window)
    rejected = sum(1 for e in in_window if e.outcome is AuditOutcome.REJECTED)
    error_rate = rejected / total if total else 0.0

    # Accepted check-ins that completed a task are flagged in the event
    # details, so durations fall out of the log without any state replay.
    first_checkin: dict[str, datetime] = {}
    completed_at: dict[str, datetime] = {}
    for event in in_window:
        if event.action != ACTION_CHECK_IN or event.outcome is not AuditOutcome.ACCEPTED:
            continue
        first_checkin.setdefault(event.subject, event.timestamp)
        if event.detail("completed_task") is True:
            completed_at.setdefault(event.subject, event.timestamp)
    durations = sorted(
        (finished - first_checkin.get(task_id, finished)).total_seconds()
        for task_id, finished in completed_at.items()
    )
    return PerformanceStats(
        window=window,
        total_attempts=total,
        rejected_attempts=rejected,
        error_rate=error_rate,
        mean_duration=statistics.fmean(durations) if durations else None,
        median_duration=statistics.median(durations) if durations else None,
        max_duration=max(durations) if durations else None,
    )


def feedback_digest(
    entries: Iterable[FeedbackEntry],
    window: tuple[Optional[date], Optional[date]] = (None, None),
) -> dict[str, list[FeedbackEntry]]:
    """Entries grouped by category, each list in timestamp order.

    Equal timestamps keep a stable order by feedback id; categories without
    entries in the window do not appear.
    """
    start, end = window
    grouped: dict[str, list[FeedbackEntry]] = {}
    for entry in entries:
        day = entry.created_at.date()
        if start is not None and day < start:
            continue
        if end is not None and day > end:
            continue
        grouped.setdefault(entry.category.value, []).append(entry)
    for bucket in grouped.values():
        bucket.sort(key=lambda e: (e.created_at, e.feedback_id))
    return dict(sorted(grouped.items()))

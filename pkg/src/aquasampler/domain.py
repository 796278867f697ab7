"""Canonical domain types shared by every other module.

All values are immutable once constructed; workflow mutations produce new
instances with a bumped version. Timestamps are UTC with second precision
(RFC 3339 text form), dates are ISO ``YYYY-MM-DD``, coordinates are
normalized to the unit square per zone.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from datetime import date, datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional


class DomainError(Exception):
    """Base class for reference-data and domain-value violations."""


class UnknownStatus(DomainError):
    pass


_TOKEN_RE = re.compile(r"^\S+$")


def _require_token(value: str, what: str) -> str:
    if not value or not _TOKEN_RE.match(value):
        raise DomainError(f"{what} must be a non-empty token without whitespace: {value!r}")
    return value


# ---------------------------------------------------------------------------
# Timestamps and dates
# ---------------------------------------------------------------------------

def format_timestamp(ts: datetime) -> str:
    """Render an aware datetime as RFC 3339 UTC with second precision."""
    if ts.tzinfo is None:
        raise DomainError("timestamps must be timezone-aware")
    return ts.astimezone(timezone.utc).replace(microsecond=0).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 timestamp, normalizing to UTC second precision."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise DomainError(f"bad timestamp {text!r}: {exc}") from None
    if parsed.tzinfo is None:
        raise DomainError(f"bad timestamp {text!r}: missing UTC offset")
    return parsed.astimezone(timezone.utc).replace(microsecond=0)


def parse_date(text: str) -> date:
    """Parse a strict ``YYYY-MM-DD`` date; anything else is rejected."""
    if not re.match(r"^\d{4}-\d{2}-\d{2}$", text.strip()):
        raise DomainError(f"bad date {text!r}: expected YYYY-MM-DD")
    try:
        return date.fromisoformat(text.strip())
    except ValueError as exc:
        raise DomainError(f"bad date {text!r}: {exc}") from None


def utc_now() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------

class CheckStatus(str, Enum):
    """Per-task check-in state, totally ordered Untouched < Partial < Completed."""

    UNTOUCHED = "Untouched"
    PARTIAL = "Partial"
    COMPLETED = "Completed"

    @property
    def rank(self) -> int:
        return _STATUS_RANK[self]

    def __lt__(self, other: object) -> bool:  # type: ignore[override]
        if not isinstance(other, CheckStatus):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other: object) -> bool:  # type: ignore[override]
        if not isinstance(other, CheckStatus):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other: object) -> bool:  # type: ignore[override]
        if not isinstance(other, CheckStatus):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other: object) -> bool:  # type: ignore[override]
        if not isinstance(other, CheckStatus):
            return NotImplemented
        return self.rank >= other.rank


_STATUS_RANK = {
    CheckStatus.UNTOUCHED: 0,
    CheckStatus.PARTIAL: 1,
    CheckStatus.COMPLETED: 2,
}

_STATUS_BY_LOWER = {s.value.lower(): s for s in CheckStatus}


def parse_check_status(text: str) -> CheckStatus:
    """Case-insensitive parse of the three canonical status names."""
    status = _STATUS_BY_LOWER.get(text.strip().lower())
    if status is None:
        raise UnknownStatus(f"unknown check status {text!r}")
    return status


def compare_status(a: CheckStatus, b: CheckStatus) -> int:
    """Total-order comparison: negative, zero, or positive like ``cmp``."""
    return (a.rank > b.rank) - (a.rank < b.rank)


class WaterType(str, Enum):
    PURIFIED_WATER = "PurifiedWater"
    CONDENSED_PURIFIED_STEAM = "CondensedPurifiedSteam"


class FeedbackCategory(str, Enum):
    TACIT_KNOWLEDGE = "TacitKnowledge"
    ERROR_PRONE = "ErrorProne"
    DEVIATION = "Deviation"
    OTHER = "Other"


# ---------------------------------------------------------------------------
# Reference data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingZone:
    zone_id: str
    name: str
    floor_plan_ref: str = ""

    def __post_init__(self) -> None:
        _require_token(self.zone_id, "zone_id")


@dataclass(frozen=True)
class SamplingPoint:
    point_id: str
    zone_id: str
    coords: tuple[float, float]
    water_type: WaterType
    mechanical_notes: str = ""
    media_refs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        _require_token(self.point_id, "point_id")
        _require_token(self.zone_id, "zone_id")
        x, y = self.coords
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise DomainError(f"point {self.point_id}: coords {self.coords} outside the unit square")


@dataclass(frozen=True)
class SamplingMethod:
    method_id: str
    equipment_list: tuple[str, ...] = ()
    key_steps: tuple[str, ...] = ()
    media_refs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        _require_token(self.method_id, "method_id")
        if not self.key_steps:
            raise DomainError(f"method {self.method_id}: key_steps must be non-empty")


def make_task_id(point_id: str, method_id: str, execution_date: date) -> str:
    """Stable task identity used when the source worksheet supplies none."""
    return f"{point_id}-{method_id}-{execution_date.isoformat()}"


@dataclass(frozen=True)
class SamplingTask:
    """One worksheet row: point x method x date plus its check-in state.

    ``checked_steps`` accumulates the method key steps confirmed so far;
    the status is always derivable from it but stored for direct reads.
    """

    task_id: str
    point_id: str
    method_id: str
    execution_date: date
    status: CheckStatus = CheckStatus.UNTOUCHED
    execution_time: Optional[datetime] = None
    assigned_role: str = "Technician"
    version: int = 0
    checked_steps: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        _require_token(self.task_id, "task_id")
        if self.version < 0:
            raise DomainError(f"task {self.task_id}: version must be >= 0")
        if (self.status is CheckStatus.COMPLETED) != (self.execution_time is not None):
            raise DomainError(
                f"task {self.task_id}: execution_time must be present iff status is Completed"
            )


@dataclass(frozen=True)
class FeedbackEntry:
    feedback_id: str
    author: str
    target: str
    text: str
    created_at: datetime
    category: FeedbackCategory

    def __post_init__(self) -> None:
        _require_token(self.feedback_id, "feedback_id")
        _require_token(self.target, "target")
        if not self.text.strip():
            raise DomainError("feedback text must be non-empty")


@dataclass(frozen=True)
class Worksheet:
    """The daily set of tasks retrieved from the LIMS export."""

    date: date
    tasks: tuple[SamplingTask, ...] = ()

    def task(self, task_id: str) -> Optional[SamplingTask]:
        for task in self.tasks:
            if task.task_id == task_id:
                return task
        return None

    def with_task(self, updated: SamplingTask) -> "Worksheet":
        out = tuple(updated if t.task_id == updated.task_id else t for t in self.tasks)
        return replace(self, tasks=out)


# ---------------------------------------------------------------------------
# Registry of zones / points / methods
# ---------------------------------------------------------------------------

class Registry:
    """Reference-data catalog: zones, sampling points, and methods.

    Entries are validated on insertion (unique ids, point zones resolve);
    instances are treated as append-only reference data.
    """

    def __init__(self) -> None:
        self.zones: dict[str, SamplingZone] = {}
        self.points: dict[str, SamplingPoint] = {}
        self.methods: dict[str, SamplingMethod] = {}

    def add_zone(self, zone: SamplingZone) -> None:
        if zone.zone_id in self.zones:
            raise DomainError(f"duplicate zone {zone.zone_id}")
        self.zones[zone.zone_id] = zone

    def add_point(self, point: SamplingPoint) -> None:
        if point.point_id in self.points:
            raise DomainError(f"duplicate point {point.point_id}")
        if point.zone_id not in self.zones:
            raise DomainError(f"point {point.point_id}: unknown zone {point.zone_id}")
        self.points[point.point_id] = point

    def add_method(self, method: SamplingMethod) -> None:
        if method.method_id in self.methods:
            raise DomainError(f"duplicate method {method.method_id}")
        self.methods[method.method_id] = method

    def zone_of_point(self, point_id: str) -> SamplingZone:
        point = self.points.get(point_id)
        if point is None:
            raise DomainError(f"unknown point {point_id}")
        return self.zones[point.zone_id]


def load_registry(directory: str | Path) -> Registry:
    """Load ``zones.json`` / ``points.json`` / ``methods.json`` from a directory."""
    base = Path(directory)
    registry = Registry()
    for record in _read_records(base / "zones.json"):
        registry.add_zone(
            SamplingZone(
                zone_id=str(record["zone_id"]),
                name=str(record.get("name", record["zone_id"])),
                floor_plan_ref=str(record.get("floor_plan_ref", "")),
            )
        )
    for record in _read_records(base / "points.json"):
        coords = record.get("coords", [0.0, 0.0])
        registry.add_point(
            SamplingPoint(
                point_id=str(record["point_id"]),
                zone_id=str(record["zone_id"]),
                coords=(float(coords[0]), float(coords[1])),
                water_type=WaterType(record.get("water_type", WaterType.PURIFIED_WATER.value)),
                mechanical_notes=str(record.get("mechanical_notes", "")),
                media_refs=tuple(record.get("media_refs", ())),
            )
        )
    for record in _read_records(base / "methods.json"):
        registry.add_method(
            SamplingMethod(
                method_id=str(record["method_id"]),
                equipment_list=tuple(record.get("equipment_list", ())),
                key_steps=tuple(record.get("key_steps", ())),
                media_refs=tuple(record.get("media_refs", ())),
            )
        )
    return registry


def save_registry(registry: Registry, directory: str | Path) -> None:
    base = Path(directory)
    base.mkdir(parents=True, exist_ok=True)
    _write_records(
        base / "zones.json",
        [
            {"zone_id": z.zone_id, "name": z.name, "floor_plan_ref": z.floor_plan_ref}
            for z in sorted(registry.zones.values(), key=lambda z: z.zone_id)
        ],
    )
    _write_records(
        base / "points.json",
        [
            {
                "point_id": p.point_id,
                "zone_id": p.zone_id,
                "coords": list(p.coords),
                "water_type": p.water_type.value,
                "mechanical_notes": p.mechanical_notes,
                "media_refs": list(p.media_refs),
            }
            for p in sorted(registry.points.values(), key=lambda p: p.point_id)
        ],
    )
    _write_records(
        base / "methods.json",
        [
            {
                "method_id": m.method_id,
                "equipment_list": list(m.equipment_list),
                "key_steps": list(m.key_steps),
                "media_refs": list(m.media_refs),
            }
            for m in sorted(registry.methods.values(), key=lambda m: m.method_id)
        ],
    )


def _read_records(path: Path) -> list[Mapping[str, object]]:
    if not path.exists():
        raise DomainError(f"missing registry file {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DomainError(f"bad registry file {path}: {exc}") from None
    if not isinstance(data, list):
        raise DomainError(f"bad registry file {path}: expected a JSON array")
    return data


def _write_records(path: Path, records: Iterable[Mapping[str, object]]) -> None:
    path.write_text(json.dumps(list(records), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

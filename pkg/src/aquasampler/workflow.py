"""Five-phase sampling-round workflow with audited, RACI-guarded mutations.

Every mutation attempt (accepted or rejected) appends exactly one event to
an append-only audit trail; accepted events carry enough detail that
replaying them from the initial state reproduces the live state. The audit
file is therefore the recovery source of truth. Statuses only ever move
forward (corrections are modeled as deviation feedback plus a new task,
never by overwriting records).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from datetime import date, datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import kb as kbmod
from .domain import (
    CheckStatus,
    FeedbackCategory,
    FeedbackEntry,
    Registry,
    SamplingTask,
    Worksheet,
    format_timestamp,
    parse_date,
    parse_timestamp,
)


class WorkflowError(Exception):
    """Rejected command; ``code`` is the stable error identifier."""

    code = "WorkflowError"


class UnknownTask(WorkflowError):
    code = "UnknownTask"


class UnknownRound(WorkflowError):
    code = "UnknownRound"


class WrongPhase(WorkflowError):
    code = "WrongPhase"


class UnauthorizedRole(WorkflowError):
    code = "UnauthorizedRole"


class StaleVersion(WorkflowError):
    code = "StaleVersion"


class StatusRegression(WorkflowError):
    code = "StatusRegression"


class EmptyCheckIn(WorkflowError):
    code = "EmptyCheckIn"


class UnknownStep(WorkflowError):
    code = "UnknownStep"


class ClockSkew(WorkflowError):
    code = "ClockSkew"


class PhaseSkip(WorkflowError):
    code = "PhaseSkip"


class IncompleteSampling(WorkflowError):
    code = "IncompleteSampling"


class UnknownTarget(WorkflowError):
    code = "UnknownTarget"


class EmptyText(WorkflowError):
    code = "EmptyText"


class UnknownAction(WorkflowError):
    code = "UnknownAction"


class CorruptAuditLog(WorkflowError):
    code = "CorruptAuditLog"


# ---------------------------------------------------------------------------
# RACI
# ---------------------------------------------------------------------------

class RaciLevel(str, Enum):
    RESPONSIBLE = "Responsible"
    ACCOUNTABLE = "Accountable"
    CONSULTED = "Consulted"
    INFORMED = "Informed"
    NONE = "None"


# IRIs used when the matrix is materialized from the knowledge base.
RACI_PREDICATES = {
    "raci:Responsible": RaciLevel.RESPONSIBLE,
    "raci:Accountable": RaciLevel.ACCOUNTABLE,
    "raci:Consulted": RaciLevel.CONSULTED,
    "raci:Informed": RaciLevel.INFORMED,
}


@dataclass(frozen=True)
class RaciMatrix:
    """(role, action) -> involvement level; acting requires R or A."""

    entries: Mapping[tuple[str, str], RaciLevel]

    def __post_init__(self) -> None:
        responsible = {a for (_, a), lvl in self.entries.items() if lvl is RaciLevel.RESPONSIBLE}
        missing = self.actions - responsible
        if missing:
            raise WorkflowError(f"actions without a Responsible role: {sorted(missing)}")

    @property
    def actions(self) -> frozenset[str]:
        return frozenset(action for (_, action) in self.entries)

    def level(self, role: str, action: str) -> RaciLevel:
        if action not in self.actions:
            raise UnknownAction(action)
        return self.entries.get((role, action), RaciLevel.NONE)

    def can_perform(self, role: str, action: str) -> bool:
        return self.level(role, action) in (RaciLevel.RESPONSIBLE, RaciLevel.ACCOUNTABLE)

    @classmethod
    def from_kb(cls, kb: kbmod.KnowledgeBase) -> "RaciMatrix":
        """Materialize the matrix from raci:* assertions between role and action individuals."""
        entries: dict[tuple[str, str], RaciLevel] = {}
        for predicate, level in RACI_PREDICATES.items():
            for binding in kb.query(("?role", predicate, "?action")):
                role = _local_name(str(binding["role"]))
                action = _local_name(str(binding["action"]))
                entries[(role, action)] = level
        return cls(entries)


def _local_name(iri: str) -> str:
    return iri.split(":", 1)[1] if ":" in iri else iri


def can_perform(raci: RaciMatrix, role: str, action: str) -> bool:
    """True iff the role is Responsible or Accountable for the action."""
    return raci.can_perform(role, action)


# ---------------------------------------------------------------------------
# Phases and rounds
# ---------------------------------------------------------------------------

class RoundPhase(str, Enum):
    MATERIAL_PREPARATION = "MaterialPreparation"
    BOTTLE_DEPOSIT = "BottleDeposit"
    FIELD_SAMPLING = "FieldSampling"
    CHARIOT_RETURN = "ChariotReturn"
    SAMPLE_RECEPTION = "SampleReception"

    @property
    def number(self) -> int:
        return _PHASE_ORDER.index(self) + 1

    def successor(self) -> Optional["RoundPhase"]:
        index = _PHASE_ORDER.index(self)
        return _PHASE_ORDER[index + 1] if index + 1 < len(_PHASE_ORDER) else None


_PHASE_ORDER = [
    RoundPhase.MATERIAL_PREPARATION,
    RoundPhase.BOTTLE_DEPOSIT,
    RoundPhase.FIELD_SAMPLING,
    RoundPhase.CHARIOT_RETURN,
    RoundPhase.SAMPLE_RECEPTION,
]

ACTION_CHECK_IN = "CheckIn"
ACTION_LOAD_WORKSHEET = "LoadWorksheet"
ACTION_RECORD_FEEDBACK = "RecordFeedback"

# Action token guarding the advance INTO each phase.
PHASE_ADVANCE_ACTIONS = {
    RoundPhase.BOTTLE_DEPOSIT: "DepositBottles",
    RoundPhase.FIELD_SAMPLING: "StartFieldSampling",
    RoundPhase.CHARIOT_RETURN: "ReturnChariot",
    RoundPhase.SAMPLE_RECEPTION: "ReceiveSamples",
}


@dataclass(frozen=True)
class PhaseLogEntry:
    phase: RoundPhase
    actor: str
    timestamp: datetime


@dataclass(frozen=True)
class SamplingRound:
    round_id: str
    date: date
    current_phase: RoundPhase
    phase_log: tuple[PhaseLogEntry, ...]


class AuditOutcome(str, Enum):
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"


@dataclass(frozen=True, eq=True)
class AuditEvent:
    """One immutable audit record; sequence numbers strictly increase."""

    seq: int
    subject: str
    action: str
    actor: str
    role: str
    timestamp: datetime
    outcome: AuditOutcome
    reason: str = ""
    details: tuple[tuple[str, object], ...] = ()

    def detail(self, key: str, default: object = None) -> object:
        for k, v in self.details:
            if k == key:
                return v
        return default


# ---------------------------------------------------------------------------
# Engine state (immutable snapshot)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EngineState:
    worksheets: Mapping[date, Worksheet] = field(default_factory=dict)
    rounds: Mapping[str, SamplingRound] = field(default_factory=dict)
    round_by_date: Mapping[date, str] = field(default_factory=dict)
    feedback: Mapping[str, FeedbackEntry] = field(default_factory=dict)
    task_index: Mapping[str, date] = field(default_factory=dict)
    last_accepted_ts: Mapping[str, datetime] = field(default_factory=dict)
    revision: int = 0

    def task(self, task_id: str) -> Optional[SamplingTask]:
        day = self.task_index.get(task_id)
        if day is None:
            return None
        return self.worksheets[day].task(task_id)

    def round_for_date(self, day: date) -> Optional[SamplingRound]:
        round_id = self.round_by_date.get(day)
        return self.rounds[round_id] if round_id else None


def canonical_state_dump(state: EngineState) -> bytes:
    """Deterministic byte form of the task/round/feedback state."""
    payload = {
        "revision": state.revision,
        "worksheets": {
            day.isoformat(): [
                {
                    "task_id": t.task_id,
                    "point_id": t.point_id,
                    "method_id": t.method_id,
                    "date": t.execution_date.isoformat(),
                    "status": t.status.value,
                    "execution_time": format_timestamp(t.execution_time)
                    if t.execution_time
                    else None,
                    "assigned_role": t.assigned_role,
                    "version": t.version,
                    "checked_steps": sorted(t.checked_steps),
                }
                for t in sorted(ws.tasks, key=lambda t: t.task_id)
            ]
            for day, ws in sorted(state.worksheets.items())
        },
        "rounds": {
            r.round_id: {
                "date": r.date.isoformat(),
                "current_phase": r.current_phase.value,
                "phase_log": [
                    [e.phase.value, e.actor, format_timestamp(e.timestamp)]
                    for e in r.phase_log
                ],
            }
            for r in sorted(state.rounds.values(), key=lambda r: r.round_id)
        },
        "feedback": {
            f.feedback_id: {
                "author": f.author,
                "target": f.target,
                "text": f.text,
                "category": f.category.value,
                "created_at": format_timestamp(f.created_at),
            }
            for f in sorted(state.feedback.values(), key=lambda f: f.feedback_id)
        },
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def status_for_steps(method_steps: Sequence[str], checked: frozenset[str]) -> CheckStatus:
    if not checked:
        return CheckStatus.UNTOUCHED
    if set(method_steps) <= checked:
        return CheckStatus.COMPLETED
    return CheckStatus.PARTIAL


# -- event application (shared by the live path and replay) -----------------

def _apply_event(state: EngineState, registry: Registry, event: AuditEvent) -> EngineState:
    if event.outcome is not AuditOutcome.ACCEPTED:
        return state
    if event.action == ACTION_LOAD_WORKSHEET:
        return _apply_load(state, event)
    if event.action == ACTION_CHECK_IN:
        return _apply_check_in(state, registry, event)
    if event.action in PHASE_ADVANCE_ACTIONS.values():
        return _apply_advance(state, event)
    if event.action == ACTION_RECORD_FEEDBACK:
        return _apply_feedback(state, event)
    raise CorruptAuditLog(f"event {event.seq}: unknown action {event.action!r}")


def _bump(state: EngineState, event: AuditEvent, **changes) -> EngineState:
    last = dict(state.last_accepted_ts)
    last[event.subject] = event.timestamp
    return replace(
        state, revision=state.revision + 1, last_accepted_ts=last, **changes
    )


def _apply_load(state: EngineState, event: AuditEvent) -> EngineState:
    day = parse_date(str(event.detail("date")))
    round_id = str(event.detail("round_id"))
    rows = event.detail("tasks")
    tasks = tuple(
        SamplingTask(
            task_id=str(row["task_id"]),
            point_id=str(row["point_id"]),
            method_id=str(row["method_id"]),
            execution_date=parse_date(str(row["date"])),
            assigned_role=str(row.get("assigned_role", "Technician")),
        )
        for row in rows  # type: ignore[union-attr]
    )
    worksheets = dict(state.worksheets)
    worksheets[day] = Worksheet(day, tasks)
    rounds = dict(state.rounds)
    rounds[round_id] = SamplingRound(
        round_id,
        day,
        RoundPhase.MATERIAL_PREPARATION,
        (PhaseLogEntry(RoundPhase.MATERIAL_PREPARATION, event.actor, event.timestamp),),
    )
    round_by_date = dict(state.round_by_date)
    round_by_date[day] = round_id
    task_index = dict(state.task_index)
    for task in tasks:
        task_index[task.task_id] = day
    return _bump(
        state,
        event,
        worksheets=worksheets,
        rounds=rounds,
        round_by_date=round_by_date,
        task_index=task_index,
    )


def _apply_check_in(state: EngineState, registry: Registry, event: AuditEvent) -> EngineState:
    task = state.task(event.subject)
    if task is None:
        raise CorruptAuditLog(f"event {event.seq}: check-in for unknown task {event.subject}")
    items = frozenset(str(i) for i in event.detail("completed_items"))  # type: ignore[union-attr]
    checked = task.checked_steps | items
    method = registry.methods[task.method_id]
    new_status = status_for_steps(method.key_steps, checked)
    updated = replace(
        task,
        checked_steps=checked,
        status=new_status,
        execution_time=event.timestamp if new_status is CheckStatus.COMPLETED else None,
        version=task.version + 1,
    )
    day = state.task_index[task.task_id]
    worksheets = dict(state.worksheets)
    worksheets[day] = worksheets[day].with_task(updated)
    return _bump(state, event, worksheets=worksheets)


def _apply_advance(state: EngineState, event: AuditEvent) -> EngineState:
    sampling_round = state.rounds.get(event.subject)
    if sampling_round is None:
        raise CorruptAuditLog(f"event {event.seq}: advance for unknown round {event.subject}")
    target = RoundPhase(str(event.detail("target_phase")))
    updated = replace(
        sampling_round,
        current_phase=target,
        phase_log=sampling_round.phase_log
        + (PhaseLogEntry(target, event.actor, event.timestamp),),
    )
    rounds = dict(state.rounds)
    rounds[event.subject] = updated
    return _bump(state, event, rounds=rounds)


def _apply_feedback(state: EngineState, event: AuditEvent) -> EngineState:
    entry = FeedbackEntry(
        feedback_id=str(event.detail("feedback_id")),
        author=event.actor,
        target=str(event.detail("target")),
        text=str(event.detail("text")),
        created_at=event.timestamp,
        category=FeedbackCategory(str(event.detail("category"))),
    )
    feedback = dict(state.feedback)
    feedback[entry.feedback_id] = entry
    return _bump(state, event, feedback=feedback)


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

class WorkflowEngine:
    """Serializable command processor over immutable state snapshots.

    Commands are applied under a lock in a total order; readers grab the
    current snapshot reference without blocking writers.
    """

    def __init__(
        self,
        registry: Registry,
        raci: RaciMatrix,
        audit_path: Optional[Union[str, Path]] = None,
    ) -> None:
        self.registry = registry
        self.raci = raci
        self._lock = threading.RLock()
        self._state = EngineState()
        self._events: list[AuditEvent] = []
        self._audit_path = Path(audit_path) if audit_path else None

    # -- snapshots ----------------------------------------------------------

    @property
    def state(self) -> EngineState:
        return self._state

    @property
    def events(self) -> tuple[AuditEvent, ...]:
        with self._lock:
            return tuple(self._events)

    def worksheet(self, day: date) -> Optional[Worksheet]:
        return self._state.worksheets.get(day)

    def audit_trail(self, subject: str) -> list[AuditEvent]:
        """All events for a subject, ascending sequence number."""
        with self._lock:
            return [e for e in self._events if e.subject == subject]

    # -- event plumbing -------------------------------------------------------

    def _append(self, event: AuditEvent) -> None:
        self._events.append(event)
        if self._audit_path is not None:
            with open(self._audit_path, "a", encoding="utf-8") as sink:
                sink.write(event_to_line(event))

    def _reject(
        self,
        subject: str,
        action: str,
        actor: str,
        role: str,
        timestamp: datetime,
        error: WorkflowError,
    ) -> None:
        event = AuditEvent(
            seq=len(self._events) + 1,
            subject=subject,
            action=action,
            actor=actor,
            role=role,
            timestamp=timestamp,
            outcome=AuditOutcome.REJECTED,
            reason=f"{error.code}: {error}",
        )
        self._append(event)
        raise error

    def _accept(
        self,
        subject: str,
        action: str,
        actor: str,
        role: str,
        timestamp: datetime,
        details: tuple[tuple[str, object], ...] = (),
    ) -> AuditEvent:
        event = AuditEvent(
            seq=len(self._events) + 1,
            subject=subject,
            action=action,
            actor=actor,
            role=role,
            timestamp=timestamp,
            outcome=AuditOutcome.ACCEPTED,
            details=details,
        )
        # apply before persisting so a bad event never reaches the log, but
        # only publish the new state once the log write has succeeded
        new_state = _apply_event(self._state, self.registry, event)
        self._append(event)
        self._state = new_state
        return event

    def _check_clock(self, subject: str, timestamp: datetime) -> Optional[ClockSkew]:
        previous = self._state.last_accepted_ts.get(subject)
        if previous is not None and timestamp < previous:
            return ClockSkew(
                f"{subject}: timestamp {format_timestamp(timestamp)} precedes "
                f"{format_timestamp(previous)}"
            )
        return None

    # -- commands --------------------------------------------------------------

    def load_worksheet(
        self,
        tasks: Iterable[SamplingTask],
        actor: str,
        role: str,
        timestamp: datetime,
    ) -> AuditEvent:
        """Register a validated daily task set and open its sampling round.

        Re-ingesting a date replaces the worksheet with freshly reset tasks
        and opens a new round; prior rounds stay in the log.
        """
        task_list = list(tasks)
        if not task_list:
            raise WorkflowError("cannot load an empty worksheet")
        days = {t.execution_date for t in task_list}
        if len(days) != 1:
            raise WorkflowError("worksheet tasks must share one execution date")
        day = days.pop()
        with self._lock:
            prior = sum(1 for r in self._state.rounds.values() if r.date == day)
            round_id = f"R-{day.isoformat()}" if not prior else f"R-{day.isoformat()}-{prior + 1}"
            details = (
                ("date", day.isoformat()),
                ("round_id", round_id),
                (
                    "tasks",
                    [
                        {
                            "task_id": t.task_id,
                            "point_id": t.point_id,
                            "method_id": t.method_id,
                            "date": t.execution_date.isoformat(),
                            "assigned_role": t.assigned_role,
                        }
                        for t in task_list
                    ],
                ),
            )
            return self._accept(round_id, ACTION_LOAD_WORKSHEET, actor, role, timestamp, details)

    def check_in(
        self,
        task_id: str,
        actor: str,
        role: str,
        timestamp: datetime,
        completed_items: Iterable[str],
        expected_version: Optional[int] = None,
    ) -> SamplingTask:
        """Record newly confirmed key steps for one task.

        The accumulated checklist drives the status: all steps checked means
        Completed (stamping the execution time), some mean Partial. Statuses
        never move backward and true no-ops are rejected rather than logged
        as accepted noise.
        """
        items = frozenset(completed_items)
        with self._lock:
            task = self._state.task(task_id)
            if task is None:
                self._reject(task_id, ACTION_CHECK_IN, actor, role, timestamp,
                             UnknownTask(task_id))
            sampling_round = self._state.round_for_date(task.execution_date)
            if sampling_round is None or sampling_round.current_phase is not RoundPhase.FIELD_SAMPLING:
                phase = sampling_round.current_phase.value if sampling_round else "none"
                self._reject(task_id, ACTION_CHECK_IN, actor, role, timestamp,
                             WrongPhase(f"round phase is {phase}, check-in requires FieldSampling"))
            try:
                allowed = self.raci.can_perform(role, ACTION_CHECK_IN)
            except UnknownAction as exc:
                self._reject(task_id, ACTION_CHECK_IN, actor, role, timestamp, exc)
            if not allowed:
                self._reject(task_id, ACTION_CHECK_IN, actor, role, timestamp,
                             UnauthorizedRole(f"{role} may not {ACTION_CHECK_IN}"))
            if expected_version is not None and expected_version != task.version:
                self._reject(task_id, ACTION_CHECK_IN, actor, role, timestamp,
                             StaleVersion(f"expected {expected_version}, current {task.version}"))
            skew = self._check_clock(task_id, timestamp)
            if skew is not None:
                self._reject(task_id, ACTION_CHECK_IN, actor, role, timestamp, skew)
            if task.status is CheckStatus.COMPLETED:
                self._reject(task_id, ACTION_CHECK_IN, actor, role, timestamp,
                             StatusRegression("task already Completed"))
            if not items:
                self._reject(task_id, ACTION_CHECK_IN, actor, role, timestamp,
                             EmptyCheckIn("no items checked"))
            method = self.registry.methods[task.method_id]
            unknown = items - set(method.key_steps)
            if unknown:
                self._reject(task_id, ACTION_CHECK_IN, actor, role, timestamp,
                             UnknownStep(f"not in method {method.method_id}: {sorted(unknown)}"))
            if items <= task.checked_steps:
                self._reject(task_id, ACTION_CHECK_IN, actor, role, timestamp,
                             EmptyCheckIn("all items already checked"))
            completes = (
                status_for_steps(method.key_steps, task.checked_steps | items)
                is CheckStatus.COMPLETED
            )
            self._accept(
                task_id,
                ACTION_CHECK_IN,
                actor,
                role,
                timestamp,
                (("completed_items", sorted(items)), ("completed_task", completes)),
            )
            updated = self._state.task(task_id)
            assert updated is not None
            return updated

    def advance_phase(
        self,
        round_id: str,
        target_phase: RoundPhase,
        actor: str,
        role: str,
        timestamp: datetime,
    ) -> SamplingRound:
        """Move a round to the next phase; the chariot may not return while
        untouched tasks lack a deviation flag."""
        with self._lock:
            sampling_round = self._state.rounds.get(round_id)
            action = PHASE_ADVANCE_ACTIONS.get(target_phase, f"AdvanceTo{target_phase.value}")
            if sampling_round is None:
                self._reject(round_id, action, actor, role, timestamp, UnknownRound(round_id))
            if sampling_round.current_phase.successor() is not target_phase:
                self._reject(
                    round_id, action, actor, role, timestamp,
                    PhaseSkip(
                        f"cannot advance {sampling_round.current_phase.value} -> {target_phase.value}"
                    ),
                )
            try:
                allowed = self.raci.can_perform(role, action)
            except UnknownAction as exc:
                self._reject(round_id, action, actor, role, timestamp, exc)
            if not allowed:
                self._reject(round_id, action, actor, role, timestamp,
                             UnauthorizedRole(f"{role} may not {action}"))
            skew = self._check_clock(round_id, timestamp)
            if skew is not None:
                self._reject(round_id, action, actor, role, timestamp, skew)
            if target_phase is RoundPhase.CHARIOT_RETURN:
                blocked = self._untouched_without_deviation(sampling_round.date)
                if blocked:
                    self._reject(
                        round_id, action, actor, role, timestamp,
                        IncompleteSampling(f"untouched without deviation flag: {blocked}"),
                    )
            self._accept(
                round_id, action, actor, role, timestamp,
                (("target_phase", target_phase.value),),
            )
            return self._state.rounds[round_id]

    def _untouched_without_deviation(self, day: date) -> list[str]:
        worksheet = self._state.worksheets.get(day)
        if worksheet is None:
            return []
        flagged = {
            entry.target
            for entry in self._state.feedback.values()
            if entry.category is FeedbackCategory.DEVIATION
        }
        return [
            t.task_id
            for t in worksheet.tasks
            if t.status is CheckStatus.UNTOUCHED
            and t.task_id not in flagged
            and t.point_id not in flagged
        ]

    def record_feedback(
        self,
        target: str,
        author: str,
        role: str,
        text: str,
        category: FeedbackCategory,
        timestamp: datetime,
    ) -> FeedbackEntry:
        """Persist one immutable comment against a task or sampling point."""
        with self._lock:
            if not text.strip():
                self._reject(target, ACTION_RECORD_FEEDBACK, author, role, timestamp,
                             EmptyText("feedback text must be non-empty"))
            if self._state.task(target) is None and target not in self.registry.points:
                self._reject(target, ACTION_RECORD_FEEDBACK, author, role, timestamp,
                             UnknownTarget(target))
            skew = self._check_clock(target, timestamp)
            if skew is not None:
                self._reject(target, ACTION_RECORD_FEEDBACK, author, role, timestamp, skew)
            feedback_id = f"FB-{len(self._events) + 1:06d}"
            # Detail keys stay alphabetical so serialized and parsed events compare equal.
            self._accept(
                target,
                ACTION_RECORD_FEEDBACK,
                author,
                role,
                timestamp,
                (
                    ("category", category.value),
                    ("feedback_id", feedback_id),
                    ("target", target),
                    ("text", text),
                ),
            )
            return self._state.feedback[feedback_id]


# ---------------------------------------------------------------------------
# Replay and persistence
# ---------------------------------------------------------------------------

def replay(
    events: Iterable[AuditEvent],
    registry: Registry,
    raci: Optional[RaciMatrix] = None,
    validate: bool = False,
) -> EngineState:
    """Fold accepted events into a state; optionally re-check every guard.

    With ``validate`` the events are pushed through a scratch engine that
    re-runs the full precondition checks, so a tampered log (out-of-order
    sequence numbers, impossible transitions, unauthorized actors) raises
    :class:`CorruptAuditLog` instead of producing a silently wrong state.
    """
    if not validate:
        state = EngineState()
        previous_seq = 0
        for event in events:
            if event.seq <= previous_seq:
                raise CorruptAuditLog(f"event {event.seq}: sequence not increasing")
            previous_seq = event.seq
            state = _apply_event(state, registry, event)
        return state

    if raci is None:
        raise CorruptAuditLog("validated replay requires the RACI matrix")
    engine = WorkflowEngine(registry, raci)
    previous_seq = 0
    for event in events:
        if event.seq <= previous_seq:
            raise CorruptAuditLog(f"event {event.seq}: sequence not increasing")
        previous_seq = event.seq
        try:
            _reissue(engine, event)
        except CorruptAuditLog:
            raise
        except WorkflowError as exc:
            if event.outcome is AuditOutcome.ACCEPTED:
                raise CorruptAuditLog(
                    f"event {event.seq}: accepted in log but rejected on replay ({exc.code})"
                ) from None
        else:
            if event.outcome is AuditOutcome.REJECTED:
                raise CorruptAuditLog(
                    f"event {event.seq}: rejected in log but accepted on replay"
                )
    return engine.state


def _reissue(engine: WorkflowEngine, event: AuditEvent) -> None:
    if event.action == ACTION_LOAD_WORKSHEET:
        rows = event.detail("tasks")
        tasks = [
            SamplingTask(
                task_id=str(r["task_id"]),
                point_id=str(r["point_id"]),
                method_id=str(r["method_id"]),
                execution_date=parse_date(str(r["date"])),
                assigned_role=str(r.get("assigned_role", "Technician")),
            )
            for r in rows  # type: ignore[union-attr]
        ]
        engine.load_worksheet(tasks, event.actor, event.role, event.timestamp)
    elif event.action == ACTION_CHECK_IN:
        items = event.detail("completed_items") or ()
        engine.check_in(
            event.subject,
            event.actor,
            event.role,
            event.timestamp,
            [str(i) for i in items],  # type: ignore[union-attr]
        )
    elif event.action in PHASE_ADVANCE_ACTIONS.values():
        target = RoundPhase(str(event.detail("target_phase")))
        engine.advance_phase(event.subject, target, event.actor, event.role, event.timestamp)
    elif event.action == ACTION_RECORD_FEEDBACK:
        engine.record_feedback(
            event.subject,
            event.actor,
            event.role,
            str(event.detail("text")),
            FeedbackCategory(str(event.detail("category"))),
            event.timestamp,
        )
    else:
        raise CorruptAuditLog(f"event {event.seq}: unknown action {event.action!r}")


_FIELD_SEP = "\t"


def event_to_line(event: AuditEvent) -> str:
    """One tab-separated record per event; details are canonical JSON."""
    for text in (event.subject, event.action, event.actor, event.role, event.reason):
        if _FIELD_SEP in text or "\n" in text:
            raise WorkflowError(f"audit field may not contain tabs/newlines: {text!r}")
    fields = [
        str(event.seq),
        event.subject,
        event.action,
        event.actor,
        event.role,
        format_timestamp(event.timestamp),
        event.outcome.value,
        event.reason,
        json.dumps(dict(event.details), sort_keys=True, separators=(",", ":")),
    ]
    return _FIELD_SEP.join(fields) + "\n"


def parse_audit_line(line: str) -> AuditEvent:
    parts = line.rstrip("\n").split(_FIELD_SEP)
    if len(parts) != 9:
        raise CorruptAuditLog(f"audit line has {len(parts)} fields, expected 9")
    seq, subject, action, actor, role, ts, outcome, reason, details_json = parts
    try:
        details = json.loads(details_json)
    except json.JSONDecodeError as exc:
        raise CorruptAuditLog(f"audit line {seq}: bad details JSON: {exc}") from None
    return AuditEvent(
        seq=int(seq),
        subject=subject,
        action=action,
        actor=actor,
        role=role,
        timestamp=parse_timestamp(ts),
        outcome=AuditOutcome(outcome),
        reason=reason,
        details=tuple(sorted(details.items())),
    )


def load_audit_log(path: Union[str, Path]) -> list[AuditEvent]:
    events = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                events.append(parse_audit_line(line))
    return events


def recover_engine(
    registry: Registry,
    raci: RaciMatrix,
    audit_path: Union[str, Path],
) -> WorkflowEngine:
    """Rebuild an engine from its audit file, re-validating every event."""
    audit_path = Path(audit_path)
    engine = WorkflowEngine(registry, raci)
    if audit_path.exists():
        for event in load_audit_log(audit_path):
            _replay_into(engine, event)
    engine._audit_path = audit_path
    return engine


def _replay_into(engine: WorkflowEngine, event: AuditEvent) -> None:
    expected_seq = len(engine._events) + 1
    if event.seq != expected_seq:
        raise CorruptAuditLog(f"event {event.seq}: expected sequence {expected_seq}")
    try:
        _reissue(engine, event)
    except CorruptAuditLog:
        raise
    except WorkflowError as exc:
        if event.outcome is AuditOutcome.ACCEPTED:
            raise CorruptAuditLog(
                f"event {event.seq}: accepted in log but rejected on replay ({exc.code})"
            ) from None
    else:
        if event.outcome is AuditOutcome.REJECTED:
            raise CorruptAuditLog(f"event {event.seq}: rejected in log but accepted on replay")

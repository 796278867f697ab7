"""HTTP face of the workbench: worksheets, check-in, maps, routes, progress.

Responses use a uniform envelope carrying exactly one of ``payload`` or
``error``; task views always include the optimistic-concurrency version.
The caller's role arrives as a trusted ``X-Role`` header (desk-scale build,
no authentication layer). A background watcher polls the drop directory for
LIMS worksheet exports and feeds them through ingestion.
"""

from __future__ import annotations

import threading
from contextlib import asynccontextmanager
from datetime import date as date_type
from datetime import datetime
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import analysis, ingestion, sequencer
from . import kb as kbmod
from .config import ServiceConfig
from .domain import (
    CheckStatus,
    DomainError,
    FeedbackCategory,
    Registry,
    SamplingTask,
    format_timestamp,
    load_registry,
    parse_date,
    parse_timestamp,
    utc_now,
)
from .workflow import (
    RaciMatrix,
    RoundPhase,
    WorkflowEngine,
    WorkflowError,
    recover_engine,
)

DEFAULT_ROLE = "Technician"

# Closed error taxonomy: engine/ingestion codes to HTTP status.
_HTTP_STATUS = {
    "UnknownTask": 404,
    "UnknownRound": 404,
    "UnknownTarget": 404,
    "NotFound": 404,
    "Conflict": 409,
    "UnauthorizedRole": 403,
    "WrongPhase": 422,
    "PhaseSkip": 422,
    "StatusRegression": 422,
    "EmptyCheckIn": 422,
    "UnknownStep": 422,
    "ClockSkew": 422,
    "IncompleteSampling": 422,
    "EmptyText": 422,
    "UnknownAction": 422,
    "BadDate": 400,
    "BadRequest": 400,
    "MalformedHeader": 400,
    "NoTasks": 404,
    "KTooLarge": 400,
    "EmptyCluster": 400,
    "UnknownPoint": 404,
    "TooLarge": 400,
}


def _ok(payload: object, version: Optional[int] = None) -> dict:
    envelope: dict[str, object] = {"payload": payload}
    if version is not None:
        envelope["version"] = version
    return envelope


def _error(code: str, message: str, details: object = None) -> JSONResponse:
    body = {"error": {"code": code, "message": message, "details": details}}
    return JSONResponse(status_code=_HTTP_STATUS.get(code, 400), content=body)


class DropWatcher(threading.Thread):
    """Polls the drop directory and ingests new worksheet exports.

    Files are renamed to ``*.done`` / ``*.failed`` after handling so a
    restart never double-ingests.
    """

    def __init__(self, ctx: "ServiceContext", interval: float) -> None:
        super().__init__(name="drop-watcher", daemon=True)
        self.ctx = ctx
        self.interval = interval
        self.last_sync: Optional[datetime] = None
        self._halt = threading.Event()

    def stop(self) -> None:
        self._halt.set()

    @property
    def connected(self) -> bool:
        return self.is_alive() and not self._halt.is_set()

    def run(self) -> None:
        while not self._halt.is_set():
            self.poll_once()
            self._halt.wait(self.interval)

    def poll_once(self) -> int:
        """Ingest every pending export once; returns the file count."""
        drop_dir = self.ctx.config.effective_drop_dir()
        if not drop_dir.exists():
            return 0
        handled = 0
        for path in sorted(drop_dir.iterdir()):
            if path.suffix not in (".txt", ".csv", ".json") or not path.is_file():
                continue
            try:
                fmt = (
                    ingestion.WorksheetFormat.STRUCTURED_RECORDS
                    if path.suffix == ".json"
                    else ingestion.WorksheetFormat.DELIMITED_TEXT
                )
                self.ctx.ingest(path.read_bytes(), actor="glims-sync", fmt=fmt)
                path.rename(path.with_suffix(path.suffix + ".done"))
                self.last_sync = utc_now()
                handled += 1
            except Exception:
                path.rename(path.with_suffix(path.suffix + ".failed"))
        return handled


class ServiceContext:
    """Shared state behind the endpoints: registry, KB, engine, watcher."""

    def __init__(
        self,
        config: ServiceConfig,
        registry: Registry,
        kb: kbmod.KnowledgeBase,
        engine: WorkflowEngine,
    ) -> None:
        self.config = config
        self.registry = registry
        self.kb = kb
        self.engine = engine
        self.model = sequencer.DistanceModel(config.inter_zone_penalty)
        self.watcher: Optional[DropWatcher] = None

    def ingest(
        self,
        data: bytes,
        actor: str,
        fmt: ingestion.WorksheetFormat = ingestion.WorksheetFormat.DELIMITED_TEXT,
        timestamp: Optional[datetime] = None,
    ) -> ingestion.IngestReport:
        """Parse, validate, and load one export; one round per date found."""
        records = ingestion.parse_worksheet(data, fmt)
        tasks, report = ingestion.validate_records(records, self.registry)
        by_date: dict[date_type, list[SamplingTask]] = {}
        for task in tasks:
            by_date.setdefault(task.execution_date, []).append(task)
        timestamp = timestamp or utc_now()
        for day in sorted(by_date):
            self.engine.load_worksheet(by_date[day], actor, "QCSupport", timestamp)
        return report

    def task_view(self, task: SamplingTask) -> dict:
        method = self.registry.methods[task.method_id]
        point = self.registry.points[task.point_id]
        return {
            "task_id": task.task_id,
            "point_id": task.point_id,
            "zone_id": point.zone_id,
            "method_id": task.method_id,
            "date": task.execution_date.isoformat(),
            "status": task.status.value,
            "execution_time": format_timestamp(task.execution_time)
            if task.execution_time
            else None,
            "assigned_role": task.assigned_role,
            "version": task.version,
            "checked_steps": sorted(task.checked_steps),
            "key_steps": list(method.key_steps),
        }


def build_context(config: ServiceConfig) -> ServiceContext:
    """Load reference data and recover the engine from the audit file.

    Raises :class:`workflow.CorruptAuditLog` when replaying the audit file
    does not reproduce a valid state.
    """
    registry = load_registry(config.registry_dir)
    if config.kb_path.exists():
        kb = kbmod.load_kb(config.kb_path)
    else:
        from . import fixtures

        kb = fixtures.build_kb(registry)
    raci = RaciMatrix.from_kb(kb)
    config.data_dir.mkdir(parents=True, exist_ok=True)
    engine = recover_engine(registry, raci, config.audit_path)
    return ServiceContext(config, registry, kb, engine)


def build_app(ctx: ServiceContext, watch: bool = True) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if watch and ctx.watcher is None:
            ctx.config.effective_drop_dir().mkdir(parents=True, exist_ok=True)
            ctx.watcher = DropWatcher(ctx, ctx.config.poll_interval)
            ctx.watcher.start()
        yield
        if ctx.watcher is not None:
            ctx.watcher.stop()

    app = FastAPI(title="aquasampler", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.ctx = ctx

    @app.exception_handler(WorkflowError)
    def _workflow_error(request: Request, exc: WorkflowError) -> JSONResponse:
        code = "Conflict" if exc.code == "StaleVersion" else exc.code
        return _error(code, str(exc))

    @app.exception_handler(DomainError)
    def _domain_error(request: Request, exc: DomainError) -> JSONResponse:
        return _error("BadRequest", str(exc))

    @app.exception_handler(sequencer.SequencerError)
    def _sequencer_error(request: Request, exc: sequencer.SequencerError) -> JSONResponse:
        return _error(type(exc).__name__, str(exc))

    # -- worksheets and tasks -------------------------------------------------

    @app.get("/api/worksheets/{date}")
    def list_worksheet(
        date: str,
        zone: Optional[str] = None,
        method: Optional[str] = None,
        point: Optional[str] = None,
        status: Optional[str] = None,
        sort: Optional[str] = None,
    ):
        try:
            parsed_day = parse_date(date)
        except DomainError as exc:
            return _error("BadDate", str(exc))
        state = ctx.engine.state
        worksheet = state.worksheets.get(parsed_day)
        tasks = list(worksheet.tasks) if worksheet else []
        registry = ctx.registry
        if zone:
            tasks = [t for t in tasks if registry.points[t.point_id].zone_id == zone]
        if method:
            tasks = [t for t in tasks if t.method_id == method]
        if point:
            tasks = [t for t in tasks if t.point_id == point]
        if status:
            try:
                wanted = CheckStatus(status)
            except ValueError:
                return _error("BadRequest", f"unknown status {status!r}")
            tasks = [t for t in tasks if t.status is wanted]
        sort_keys = {
            "zone": lambda t: registry.points[t.point_id].zone_id,
            "method": lambda t: t.method_id,
            "point": lambda t: t.point_id,
            "date": lambda t: t.execution_date.isoformat(),
            "status": lambda t: t.status.rank,
        }
        if sort:
            key = sort_keys.get(sort)
            if key is None:
                return _error("BadRequest", f"unknown sort column {sort!r}")
            tasks.sort(key=key)
        sampling_round = state.round_for_date(parsed_day)
        payload = {
            "date": parsed_day.isoformat(),
            "round": {
                "round_id": sampling_round.round_id,
                "current_phase": sampling_round.current_phase.value,
            }
            if sampling_round
            else None,
            "tasks": [ctx.task_view(t) for t in tasks],
        }
        return _ok(payload, version=state.revision)

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str):
        task = ctx.engine.state.task(task_id)
        if task is None:
            return _error("UnknownTask", f"no task {task_id}")
        return _ok(ctx.task_view(task), version=task.version)

    async def _json_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception as exc:  # malformed JSON
            raise DomainError(f"bad JSON body: {exc}") from None
        if not isinstance(body, dict):
            raise DomainError("request body must be a JSON object")
        return body

    @app.post("/api/tasks/{task_id}/checkin")
    async def post_check_in(
        task_id: str,
        request: Request,
        x_role: str = Header(default=DEFAULT_ROLE),
    ):
        body = await _json_body(request)
        try:
            actor = str(body["actor"])
            timestamp = parse_timestamp(str(body["timestamp"]))
            items = [str(i) for i in body.get("completed_items", [])]
            expected_version = body.get("expected_version")
            if expected_version is not None:
                expected_version = int(expected_version)
        except (KeyError, TypeError, ValueError, DomainError) as exc:
            return _error("BadRequest", f"bad check-in body: {exc}")
        task = ctx.engine.check_in(
            task_id, actor, x_role, timestamp, items, expected_version
        )
        return _ok(ctx.task_view(task), version=task.version)

    # -- points and maps --------------------------------------------------------

    @app.get("/api/points/{point_id}")
    def get_point(point_id: str):
        point = ctx.registry.points.get(point_id)
        if point is None:
            return _error("NotFound", f"no point {point_id}")
        facts = [
            {"predicate": str(b["p"]), "object": str(b["o"])}
            for b in ctx.kb.query((f"pt:{point_id}", "?p", "?o"))
        ]
        state = ctx.engine.state
        entries = [
            e
            for e in state.feedback.values()
            if e.target == point_id
            or (state.task(e.target) is not None and state.task(e.target).point_id == point_id)
        ]
        digest = {
            category: [
                {
                    "feedback_id": e.feedback_id,
                    "author": e.author,
                    "target": e.target,
                    "text": e.text,
                    "category": e.category.value,
                    "created_at": format_timestamp(e.created_at),
                }
                for e in bucket
            ]
            for category, bucket in analysis.feedback_digest(entries).items()
        }
        payload = {
            "point_id": point.point_id,
            "zone_id": point.zone_id,
            "coords": list(point.coords),
            "water_type": point.water_type.value,
            "mechanical_notes": point.mechanical_notes,
            "media_refs": list(point.media_refs),
            "facts": facts,
            "feedback": digest,
        }
        return _ok(payload)

    @app.get("/api/zones/{zone_id}/map")
    def get_zone_map(zone_id: str, date: Optional[str] = None):
        zone = ctx.registry.zones.get(zone_id)
        if zone is None:
            return _error("NotFound", f"no zone {zone_id}")
        try:
            parsed_day = parse_date(date) if date else utc_now().date()
        except DomainError as exc:
            return _error("BadDate", str(exc))
        worksheet = ctx.engine.state.worksheets.get(parsed_day)
        markers = []
        for point in sorted(ctx.registry.points.values(), key=lambda p: p.point_id):
            if point.zone_id != zone_id:
                continue
            statuses = [
                t.status
                for t in (worksheet.tasks if worksheet else ())
                if t.point_id == point.point_id
            ]
            # Worst-case display: a point is only as done as its least-done task.
            status = min(statuses).value if statuses else "NoTask"
            markers.append(
                {
                    "point_id": point.point_id,
                    "coords": list(point.coords),
                    "status": status,
                    "task_ids": [
                        t.task_id
                        for t in (worksheet.tasks if worksheet else ())
                        if t.point_id == point.point_id
                    ],
                }
            )
        payload = {
            "zone_id": zone.zone_id,
            "name": zone.name,
            "floor_plan_ref": zone.floor_plan_ref,
            "date": parsed_day.isoformat(),
            "markers": markers,
        }
        return _ok(payload)

    # -- routes ------------------------------------------------------------------

    @app.get("/api/routes")
    def get_route(
        date: str,
        start: str,
        zone: Optional[str] = None,
        k: Optional[int] = None,
    ):
        try:
            parsed_day = parse_date(date)
        except DomainError as exc:
            return _error("BadDate", str(exc))
        worksheet = ctx.engine.state.worksheets.get(parsed_day)
        tasks = list(worksheet.tasks) if worksheet else []
        if zone:
            tasks = [t for t in tasks if ctx.registry.points[t.point_id].zone_id == zone]
        if not tasks:
            return _error("NoTasks", f"no tasks for {date}" + (f" in {zone}" if zone else ""))
        if ctx.registry.points.get(start) is None:
            return _error("UnknownPoint", f"no start point {start}")
        clusters = sequencer.cluster_tasks(tasks, ctx.registry, k=k, model=ctx.model)
        by_id = {t.task_id: t for t in tasks}
        plans = []
        for index in range(clusters.k):
            members = [by_id[tid] for tid in clusters.cluster(index)]
            if not members:
                continue
            plan = sequencer.sequence_route(members, start, ctx.registry, ctx.model)
            plans.append(
                {
                    "cluster": index,
                    "start_point": plan.start_point,
                    "total_cost": plan.total_cost,
                    "legs": [
                        {
                            "task_id": stop.task_id,
                            "point_id": stop.point_id,
                            "cost": stop.leg_cost,
                        }
                        for stop in plan.stops
                    ],
                }
            )
        return _ok({"date": parsed_day.isoformat(), "plans": plans})

    # -- analytics ------------------------------------------------------------------

    @app.get("/api/progress/{date}")
    def get_progress(date: str):
        try:
            parsed_day = parse_date(date)
        except DomainError as exc:
            return _error("BadDate", str(exc))
        state = ctx.engine.state
        snapshot = analysis.progress(state.worksheets.get(parsed_day), ctx.registry, utc_now())
        payload = {
            "date": parsed_day.isoformat(),
            "as_of": format_timestamp(snapshot.as_of),
            "total": snapshot.total,
            "by_status": dict(snapshot.by_status),
            "completion_rate": snapshot.completion_rate,
            "by_zone": dict(snapshot.by_zone),
        }
        return _ok(payload, version=state.revision)

    @app.get("/api/performance")
    def get_performance(start: Optional[str] = None, end: Optional[str] = None):
        try:
            window = (
                parse_date(start) if start else None,
                parse_date(end) if end else None,
            )
        except DomainError as exc:
            return _error("BadDate", str(exc))
        stats = analysis.performance(ctx.engine.events, window)
        payload = {
            "window": [d.isoformat() if d else None for d in stats.window],
            "total_attempts": stats.total_attempts,
            "rejected_attempts": stats.rejected_attempts,
            "error_rate": stats.error_rate,
            "mean_duration": stats.mean_duration,
            "median_duration": stats.median_duration,
            "max_duration": stats.max_duration,
        }
        return _ok(payload)

    # -- ingestion and feedback --------------------------------------------------------

    @app.post("/api/ingest")
    async def post_ingest(request: Request, x_role: str = Header(default="QCSupport")):
        data = await request.body()
        if not data:
            return _error("BadRequest", "empty ingest body")
        fmt = (
            ingestion.WorksheetFormat.STRUCTURED_RECORDS
            if request.headers.get("content-type", "").startswith("application/json")
            else ingestion.WorksheetFormat.DELIMITED_TEXT
        )
        try:
            report = ctx.ingest(data, actor="api-upload", fmt=fmt)
        except ingestion.MalformedHeader as exc:
            return _error("MalformedHeader", str(exc))
        payload = {
            "accepted": report.accepted_count,
            "rejected": [{"row": row, "reason": reason} for row, reason in report.rejected],
            "source_date": report.source_date.isoformat() if report.source_date else None,
        }
        return _ok(payload)

    @app.post("/api/feedback")
    async def post_feedback(request: Request, x_role: str = Header(default=DEFAULT_ROLE)):
        body = await _json_body(request)
        try:
            author = str(body["author"])
            target = str(body["target"])
            text = str(body.get("text", ""))
            category = FeedbackCategory(str(body.get("category", "Other")))
            timestamp = (
                parse_timestamp(str(body["timestamp"])) if "timestamp" in body else utc_now()
            )
        except (KeyError, TypeError, ValueError, DomainError) as exc:
            return _error("BadRequest", f"bad feedback body: {exc}")
        entry = ctx.engine.record_feedback(target, author, x_role, text, category, timestamp)
        payload = {
            "feedback_id": entry.feedback_id,
            "author": entry.author,
            "target": entry.target,
            "text": entry.text,
            "category": entry.category.value,
            "created_at": format_timestamp(entry.created_at),
        }
        return _ok(payload)

    # -- rounds and sync ------------------------------------------------------------

    @app.post("/api/rounds/{round_id}/advance")
    async def post_advance(
        round_id: str,
        request: Request,
        x_role: str = Header(default=DEFAULT_ROLE),
    ):
        body = await _json_body(request)
        try:
            target = RoundPhase(str(body["target_phase"]))
            actor = str(body["actor"])
            timestamp = parse_timestamp(str(body["timestamp"]))
        except (KeyError, TypeError, ValueError, DomainError) as exc:
            return _error("BadRequest", f"bad advance body: {exc}")
        sampling_round = ctx.engine.advance_phase(round_id, target, actor, x_role, timestamp)
        payload = {
            "round_id": sampling_round.round_id,
            "date": sampling_round.date.isoformat(),
            "current_phase": sampling_round.current_phase.value,
            "phase_log": [
                {
                    "phase": entry.phase.value,
                    "actor": entry.actor,
                    "timestamp": format_timestamp(entry.timestamp),
                }
                for entry in sampling_round.phase_log
            ],
        }
        return _ok(payload)

    @app.get("/api/sync")
    def sync_status():
        watcher = ctx.watcher
        payload = {
            "connected": bool(watcher and watcher.connected),
            "last_sync": format_timestamp(watcher.last_sync)
            if watcher and watcher.last_sync
            else None,
        }
        return _ok(payload)

    media_dir = ctx.config.media_dir
    if media_dir.exists():
        app.mount("/media", StaticFiles(directory=str(media_dir)), name="media")
    static_dir = ctx.config.static_dir
    if static_dir and Path(static_dir).exists():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def serve(config: ServiceConfig, watch: bool = True) -> None:
    """Run the service; exits 2 when the audit log fails replay validation."""
    import uvicorn

    ctx = build_context(config)
    app = build_app(ctx, watch=watch)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")

"""Administrator command line: ingest, validate, query, route, report, serve.

Every verb is a thin adapter over the owning module; ``--porcelain``
switches to stable line-oriented output for scripting. Exit codes: 0
success, 1 usage/config error, 2 data error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

from . import analysis, ingestion, sequencer
from . import kb as kbmod
from .config import ConfigError, ServiceConfig, load_config
from .domain import DomainError, Registry, load_registry, parse_date, utc_now
from .workflow import CorruptAuditLog, RaciMatrix, WorkflowError, recover_engine

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="aquasampler", description=__doc__)
    parser.add_argument("--config", help="path to the service config file")
    parser.add_argument("--data-dir", help="override the data directory")
    parser.add_argument(
        "--porcelain", action="store_true", help="stable line-oriented output"
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="parse and validate a worksheet file")
    p.add_argument("file")
    p.add_argument("--registry", help="registry directory (defaults to data dir)")

    p = sub.add_parser("ingest", help="validate a worksheet and load it into the data dir")
    p.add_argument("file")
    p.add_argument("--actor", default="cli")

    p = sub.add_parser("kb-load", help="load a knowledge-base file and report consistency")
    p.add_argument("file")

    p = sub.add_parser("kb-query", help="run a triple pattern, e.g. \"?p app:locatedInZone zone:Z-A\"")
    p.add_argument("pattern")
    p.add_argument("--kb", help="knowledge-base file (defaults to data dir kb.txt)")

    p = sub.add_parser("route", help="compute a visiting order for a date")
    p.add_argument("--date", required=True)
    p.add_argument("--start", required=True, help="start point id")
    p.add_argument("--zone", help="restrict to one zone")
    p.add_argument("--k", type=int, help="cluster count (defaults to one per zone)")

    p = sub.add_parser("report", help="progress and performance for a date")
    p.add_argument("--date", required=True)

    p = sub.add_parser("export", help="export a worksheet with check-in state")
    p.add_argument("--date", required=True)
    p.add_argument("--out", help="output file (defaults to stdout)")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--no-watch", action="store_true", help="disable the drop-dir watcher")

    return parser


def _load_state(config: ServiceConfig):
    from .fixtures import build_kb

    registry = load_registry(config.registry_dir)
    kb = kbmod.load_kb(config.kb_path) if config.kb_path.exists() else build_kb(registry)
    raci = RaciMatrix.from_kb(kb)
    engine = recover_engine(registry, raci, config.audit_path)
    return registry, kb, raci, engine


def _registry_for(args: argparse.Namespace, config: ServiceConfig) -> Registry:
    directory = getattr(args, "registry", None) or config.registry_dir
    return load_registry(directory)


def _cmd_validate(args: argparse.Namespace, config: ServiceConfig, porcelain: bool) -> int:
    registry = _registry_for(args, config)
    data = Path(args.file).read_bytes()
    records = ingestion.parse_worksheet(data)
    tasks, report = ingestion.validate_records(records, registry)
    if porcelain:
        print(f"accepted\t{report.accepted_count}")
        print(f"rejected\t{len(report.rejected)}")
        for row, reason in report.rejected:
            print(f"reject\t{row}\t{reason}")
    else:
        print(f"accepted {report.accepted_count}, rejected {len(report.rejected)}")
        for row, reason in report.rejected:
            print(f"  row {row}: {reason}")
    return EXIT_OK


def _cmd_ingest(args: argparse.Namespace, config: ServiceConfig, porcelain: bool) -> int:
    registry, _, raci, engine = _load_state(config)
    data = Path(args.file).read_bytes()
    records = ingestion.parse_worksheet(data)
    tasks, report = ingestion.validate_records(records, registry)
    by_date: dict[date, list] = {}
    for task in tasks:
        by_date.setdefault(task.execution_date, []).append(task)
    timestamp = utc_now()
    for day in sorted(by_date):
        engine.load_worksheet(by_date[day], args.actor, "QCSupport", timestamp)
    if porcelain:
        print(f"accepted\t{report.accepted_count}")
        print(f"rejected\t{len(report.rejected)}")
        print(f"worksheets\t{len(by_date)}")
    else:
        print(
            f"accepted {report.accepted_count}, rejected {len(report.rejected)}, "
            f"loaded {len(by_date)} worksheet(s) into {config.data_dir}"
        )
    return EXIT_OK


def _cmd_kb_load(args: argparse.Namespace, config: ServiceConfig, porcelain: bool) -> int:
    kb = kbmod.load_kb(args.file)
    report = kb.check_consistency()
    if porcelain:
        print(f"classes\t{len(kb.classes)}")
        print(f"properties\t{len(kb.properties)}")
        print(f"individuals\t{len(kb.individuals)}")
        print(f"assertions\t{len(kb.assertions)}")
        print(f"templates\t{len(kb.templates)}")
        print(f"findings\t{len(report.findings)}")
        for finding in report.findings:
            print(f"finding\t{finding.kind}\t{finding.detail}")
    else:
        print(
            f"loaded {len(kb.classes)} classes, {len(kb.properties)} properties, "
            f"{len(kb.individuals)} individuals, {len(kb.assertions)} assertions"
        )
        if report.is_consistent:
            print("consistent")
        else:
            for finding in report.findings:
                print(f"  {finding.kind}: {finding.detail}")
    return EXIT_OK if report.is_consistent else EXIT_DATA


def _cmd_kb_query(args: argparse.Namespace, config: ServiceConfig, porcelain: bool) -> int:
    kb_path = args.kb or config.kb_path
    kb = kbmod.load_kb(kb_path)
    terms = args.pattern.split()
    if len(terms) != 3:
        raise UsageError("pattern must have exactly three terms")
    pattern = tuple(kbmod.parse_term(t) for t in terms)
    bindings = kb.query(pattern)  # type: ignore[arg-type]
    variables = [t[1:] for t in terms if t.startswith("?")]
    if porcelain:
        print(f"rows\t{len(bindings)}")
        for binding in bindings:
            print("row\t" + "\t".join(f"{v}={binding[v]}" for v in variables))
    else:
        print(f"{len(bindings)} result(s)")
        for binding in bindings:
            print("  " + ", ".join(f"?{v} = {binding[v]}" for v in variables))
    return EXIT_OK


def _cmd_route(args: argparse.Namespace, config: ServiceConfig, porcelain: bool) -> int:
    registry, _, _, engine = _load_state(config)
    day = parse_date(args.date)
    worksheet = engine.worksheet(day)
    tasks = list(worksheet.tasks) if worksheet else []
    if args.zone:
        tasks = [t for t in tasks if registry.points[t.point_id].zone_id == args.zone]
    if not tasks:
        print(f"no tasks for {args.date}", file=sys.stderr)
        return EXIT_DATA
    model = sequencer.DistanceModel(config.inter_zone_penalty)
    clusters = sequencer.cluster_tasks(tasks, registry, k=args.k, model=model)
    by_id = {t.task_id: t for t in tasks}
    for index in range(clusters.k):
        members = [by_id[tid] for tid in clusters.cluster(index)]
        if not members:
            continue
        plan = sequencer.sequence_route(members, args.start, registry, model)
        if porcelain:
            print(f"plan\t{index}\t{plan.start_point}\t{plan.total_cost:.6f}")
            for position, stop in enumerate(plan.stops, start=1):
                print(f"leg\t{index}\t{position}\t{stop.task_id}\t{stop.point_id}\t{stop.leg_cost:.6f}")
        else:
            print(f"route {index} from {plan.start_point} (total cost {plan.total_cost:.3f})")
            for position, stop in enumerate(plan.stops, start=1):
                print(f"  {position}. {stop.point_id}  {stop.task_id}  (+{stop.leg_cost:.3f})")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace, config: ServiceConfig, porcelain: bool) -> int:
    registry, _, _, engine = _load_state(config)
    day = parse_date(args.date)
    snapshot = analysis.progress(engine.worksheet(day), registry, utc_now())
    stats = analysis.performance(engine.events, (day, day))
    if porcelain:
        print(f"total\t{snapshot.total}")
        for status, count in sorted(snapshot.by_status.items()):
            print(f"status\t{status}\t{count}")
        print(f"completion_rate\t{snapshot.completion_rate:.6f}")
        for zone, rate in sorted(snapshot.by_zone.items()):
            print(f"zone\t{zone}\t{rate:.6f}")
        print(f"attempts\t{stats.total_attempts}")
        print(f"rejected\t{stats.rejected_attempts}")
        print(f"error_rate\t{stats.error_rate:.6f}")
    else:
        print(f"progress for {args.date}: {snapshot.total} task(s)")
        for status, count in sorted(snapshot.by_status.items()):
            print(f"  {status}: {count}")
        print(f"  completion rate: {snapshot.completion_rate:.1%}")
        for zone, rate in sorted(snapshot.by_zone.items()):
            print(f"  {zone}: {rate:.1%}")
        print(
            f"attempts {stats.total_attempts}, rejected {stats.rejected_attempts}, "
            f"error rate {stats.error_rate:.1%}"
        )
    return EXIT_OK


def _cmd_export(args: argparse.Namespace, config: ServiceConfig, porcelain: bool) -> int:
    registry, _, _, engine = _load_state(config)
    day = parse_date(args.date)
    worksheet = engine.worksheet(day)
    if worksheet is None:
        print(f"no worksheet for {args.date}", file=sys.stderr)
        return EXIT_DATA
    data = ingestion.export_worksheet(worksheet, registry)
    if args.out:
        Path(args.out).write_bytes(data)
        print(f"exported {len(worksheet.tasks)} task(s) to {args.out}")
    else:
        sys.stdout.write(data.decode("utf-8"))
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace, config: ServiceConfig, porcelain: bool) -> int:
    from .service import serve

    serve(config, watch=not args.no_watch)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "ingest": _cmd_ingest,
    "kb-load": _cmd_kb_load,
    "kb-query": _cmd_kb_query,
    "route": _cmd_route,
    "report": _cmd_report,
    "export": _cmd_export,
    "serve": _cmd_serve,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and friends
        return int(exc.code or 0)

    try:
        config = load_config(args.config)
        if args.data_dir:
            config = dataclasses.replace(config, data_dir=Path(args.data_dir))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return _COMMANDS[args.verb](args, config, args.porcelain)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CorruptAuditLog as exc:
        print(f"data corruption: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DomainError, WorkflowError, ingestion.IngestionError, kbmod.KbError,
            sequencer.SequencerError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()

"""Shared fixtures: demo registry, knowledge base, engines, worksheet builders."""

from __future__ import annotations

import random
from datetime import date, datetime, timedelta

import pytest

from aquasampler import fixtures, ingestion, workflow
from aquasampler.domain import Registry, SamplingTask, parse_timestamp

DAY = date(2024, 3, 5)
T0 = parse_timestamp("2024-03-05T06:00:00Z")


def ts(offset_seconds: int = 0) -> datetime:
    return T0 + timedelta(seconds=offset_seconds)


@pytest.fixture(scope="session")
def registry() -> Registry:
    return fixtures.build_registry()


@pytest.fixture(scope="session")
def demo_kb(registry):
    return fixtures.build_kb(registry)


@pytest.fixture(scope="session")
def raci(demo_kb):
    return workflow.RaciMatrix.from_kb(demo_kb)


@pytest.fixture()
def demo_tasks(registry) -> list[SamplingTask]:
    records = ingestion.parse_worksheet(fixtures.demo_worksheet_text(DAY).encode())
    tasks, report = ingestion.validate_records(records, registry)
    assert not report.rejected
    return tasks


@pytest.fixture()
def engine(registry, raci) -> workflow.WorkflowEngine:
    return workflow.WorkflowEngine(registry, raci)


@pytest.fixture()
def field_engine(engine, demo_tasks) -> workflow.WorkflowEngine:
    """Engine with the demo worksheet loaded and its round in FieldSampling."""
    event = engine.load_worksheet(demo_tasks, "qc1", "QCSupport", ts(0))
    round_id = event.subject
    engine.advance_phase(round_id, workflow.RoundPhase.BOTTLE_DEPOSIT, "qc1", "QCSupport", ts(60))
    engine.advance_phase(
        round_id, workflow.RoundPhase.FIELD_SAMPLING, "tech1", "Technician", ts(120)
    )
    return engine


def random_points_registry(rng: random.Random, n_points: int, zones: int = 1) -> Registry:
    """Registry with random unit-square points spread over the given zones."""
    from aquasampler.domain import SamplingMethod, SamplingPoint, SamplingZone, WaterType

    registry = Registry()
    for z in range(zones):
        registry.add_zone(SamplingZone(f"RZ-{z}", f"zone {z}"))
    registry.add_method(SamplingMethod("M-R", key_steps=("step",)))
    for i in range(n_points):
        registry.add_point(
            SamplingPoint(
                point_id=f"RP-{i:03d}",
                zone_id=f"RZ-{i % zones}",
                coords=(rng.random(), rng.random()),
                water_type=WaterType.PURIFIED_WATER,
            )
        )
    return registry


def tasks_for_registry(registry: Registry, day: date = DAY) -> list[SamplingTask]:
    from aquasampler.domain import make_task_id

    method = next(iter(registry.methods))
    return [
        SamplingTask(
            task_id=make_task_id(point_id, method, day),
            point_id=point_id,
            method_id=method,
            execution_date=day,
        )
        for point_id in sorted(registry.points)
    ]


ALL_STEPS = ["flush outlet", "fill bottle", "seal and label"]


def seed_demo_history(data_dir, registry, raci) -> None:
    """Deterministic audit history behind the committed CLI goldens."""
    import pytest as _pytest

    engine = workflow.WorkflowEngine(registry, raci, audit_path=data_dir / "audit.log")
    records = ingestion.parse_worksheet(fixtures.demo_worksheet_text(DAY).encode())
    tasks, _ = ingestion.validate_records(records, registry)
    event = engine.load_worksheet(tasks, "qc1", "QCSupport", ts(0))
    engine.advance_phase(event.subject, workflow.RoundPhase.BOTTLE_DEPOSIT, "qc1", "QCSupport", ts(60))
    engine.advance_phase(event.subject, workflow.RoundPhase.FIELD_SAMPLING, "tech1", "Technician", ts(120))
    engine.check_in("P-101-M-STD-2024-03-05", "tech1", "Technician", ts(200), ALL_STEPS)
    engine.check_in("P-102-M-STD-2024-03-05", "tech1", "Technician", ts(300), ALL_STEPS)
    engine.check_in("P-201-M-STD-2024-03-05", "tech1", "Technician", ts(400), ALL_STEPS[:1])
    with _pytest.raises(workflow.EmptyCheckIn):
        engine.check_in("P-203-M-STD-2024-03-05", "tech1", "Technician", ts(500), [])

"""Case-study reference data: registry, application ontology, RACI matrix.

The role assignments for the QC-side phases are fixture data chosen for a
runnable demo, not authoritative facility policy. Run this module as a
script to materialize a sample data directory:

    python -m aquasampler.fixtures <target-dir>
"""

from __future__ import annotations

import sys
from datetime import date, timedelta
from pathlib import Path

from . import kb as kbmod
from .domain import (
    Registry,
    SamplingMethod,
    SamplingPoint,
    SamplingZone,
    WaterType,
    save_registry,
)
from .ingestion import DELIMITER, EXPORT_COLUMNS
from .workflow import RaciMatrix

APP_SAMPLING_POINT = "app:SamplingPoint"
APP_SAMPLING_ZONE = "app:SamplingZone"
APP_SAMPLING_PROCESS = "app:SamplingProcess"
APP_ROLE = "app:OrganizationalRole"
APP_ACTION = "app:MaintenanceAction"
APP_TERM = "app:Term"
APP_LOCATED_IN_ZONE = "app:locatedInZone"
APP_HAS_WATER_TYPE = "app:hasWaterType"
APP_DEFINITION = "app:definition"

RACI_TEMPLATE = "raci-assignment"
TERM_TEMPLATE = "terminology"

ROLE_TECHNICIAN = "Technician"
ROLE_QC_SUPPORT = "QCSupport"


def build_registry() -> Registry:
    """Two-zone demo site with a handful of outlets and two methods."""
    registry = Registry()
    registry.add_zone(SamplingZone("Z-A", "Production Hall A", "media/zone-a.png"))
    registry.add_zone(SamplingZone("Z-B", "Utilities Basement", "media/zone-b.png"))
    points = [
        ("P-101", "Z-A", (0.20, 0.30), WaterType.PURIFIED_WATER, "valve stiff when cold"),
        ("P-102", "Z-A", (0.45, 0.25), WaterType.PURIFIED_WATER, ""),
        ("P-103", "Z-A", (0.70, 0.60), WaterType.CONDENSED_PURIFIED_STEAM, "hot surface"),
        ("P-104", "Z-A", (0.15, 0.80), WaterType.PURIFIED_WATER, ""),
        ("P-201", "Z-B", (0.30, 0.40), WaterType.PURIFIED_WATER, "behind panel"),
        ("P-202", "Z-B", (0.60, 0.35), WaterType.CONDENSED_PURIFIED_STEAM, ""),
        ("P-203", "Z-B", (0.80, 0.75), WaterType.PURIFIED_WATER, ""),
        ("P-000", "Z-A", (0.05, 0.05), WaterType.PURIFIED_WATER, "chariot bay"),
    ]
    for point_id, zone_id, coords, water, notes in points:
        registry.add_point(
            SamplingPoint(
                point_id=point_id,
                zone_id=zone_id,
                coords=coords,
                water_type=water,
                mechanical_notes=notes,
                media_refs=(f"media/{point_id.lower()}.jpg",),
            )
        )
    registry.add_method(
        SamplingMethod(
            method_id="M-STD",
            equipment_list=("sterile bottle 500ml", "gloves", "wipes"),
            key_steps=("flush outlet", "fill bottle", "seal and label"),
            media_refs=("media/m-std.mp4",),
        )
    )
    registry.add_method(
        SamplingMethod(
            method_id="M-CFU",
            equipment_list=("CFU bottle", "gloves", "cool pack"),
            key_steps=("flush outlet", "fill bottle", "seal and label", "chill sample"),
        )
    )
    return registry


RACI_FIXTURE = (
    (ROLE_QC_SUPPORT, "LoadWorksheet", "Responsible"),
    (ROLE_QC_SUPPORT, "DepositBottles", "Responsible"),
    (ROLE_TECHNICIAN, "DepositBottles", "Informed"),
    (ROLE_TECHNICIAN, "StartFieldSampling", "Responsible"),
    (ROLE_QC_SUPPORT, "StartFieldSampling", "Informed"),
    (ROLE_TECHNICIAN, "CheckIn", "Responsible"),
    (ROLE_QC_SUPPORT, "CheckIn", "Informed"),
    (ROLE_TECHNICIAN, "ReturnChariot", "Responsible"),
    (ROLE_QC_SUPPORT, "ReceiveSamples", "Responsible"),
    (ROLE_TECHNICIAN, "ReceiveSamples", "Consulted"),
    (ROLE_TECHNICIAN, "RecordFeedback", "Responsible"),
    (ROLE_QC_SUPPORT, "RecordFeedback", "Responsible"),
)

TERMS = (
    ("GMP", "Good Manufacturing Practice"),
    ("LIMS", "Laboratory Information Management System"),
    ("CFU", "Colony Forming Unit"),
    ("QC", "Quality Control department"),
    ("EM", "Engineering and Maintenance department"),
)


def build_kb(registry: Registry | None = None) -> kbmod.KnowledgeBase:
    """Application ontology on top of the upper-level skeleton.

    Adds the sampling domain classes, the role/action individuals, the RACI
    and terminology templates, and grounds both templates with the fixture
    data, plus one located-in assertion per registry point.
    """
    registry = registry or build_registry()
    kb = kbmod.load_bfo_skeleton()

    # Mid-level bridge classes, then domain/application classes under them.
    kb = kb.add_class("iof:MaterialEntity", (kbmod.INDEPENDENT_CONTINUANT,), kbmod.OntologyLevel.MID)
    kb = kb.add_class("iof:PlannedProcess", (kbmod.PROCESS,), kbmod.OntologyLevel.MID)
    kb = kb.add_class(
        "iof:InformationContentEntity",
        (kbmod.GENERICALLY_DEPENDENT_CONTINUANT,),
        kbmod.OntologyLevel.MID,
    )
    kb = kb.add_class(APP_SAMPLING_POINT, ("iof:MaterialEntity",), kbmod.OntologyLevel.DOMAIN)
    kb = kb.add_class(APP_SAMPLING_ZONE, ("iof:MaterialEntity",), kbmod.OntologyLevel.DOMAIN)
    kb = kb.add_class(APP_SAMPLING_PROCESS, ("iof:PlannedProcess",), kbmod.OntologyLevel.DOMAIN)
    kb = kb.add_class(
        APP_ROLE, (kbmod.SPECIFICALLY_DEPENDENT_CONTINUANT,), kbmod.OntologyLevel.DOMAIN
    )
    kb = kb.add_class(APP_ACTION, ("iof:PlannedProcess",), kbmod.OntologyLevel.DOMAIN)
    kb = kb.add_class(APP_TERM, ("iof:InformationContentEntity",), kbmod.OntologyLevel.DOMAIN)

    kb = kb.add_property(
        APP_LOCATED_IN_ZONE, kbmod.PropertyKind.OBJECT, APP_SAMPLING_POINT, APP_SAMPLING_ZONE
    )
    kb = kb.add_property(APP_HAS_WATER_TYPE, kbmod.PropertyKind.DATA, APP_SAMPLING_POINT, "string")
    kb = kb.add_property(APP_DEFINITION, kbmod.PropertyKind.DATA, APP_TERM, "string")
    for predicate in (
        "raci:Responsible",
        "raci:Accountable",
        "raci:Consulted",
        "raci:Informed",
    ):
        kb = kb.add_property(predicate, kbmod.PropertyKind.OBJECT, APP_ROLE, APP_ACTION)

    kb = kb.add_template(
        kbmod.Template(
            RACI_TEMPLATE,
            slots=("role", "action", "level"),
            patterns=(("?role", "?level", "?action"),),
        )
    )
    kb = kb.add_template(
        kbmod.Template(
            TERM_TEMPLATE,
            slots=("term", "definition"),
            patterns=(("?term", APP_DEFINITION, "?definition"),),
        )
    )

    for role in (ROLE_TECHNICIAN, ROLE_QC_SUPPORT):
        kb = kb.assert_individual(f"role:{role}", (APP_ROLE,))
    for action in sorted({action for _, action, _ in RACI_FIXTURE}):
        kb = kb.assert_individual(f"action:{action}", (APP_ACTION,))
    for role, action, level in RACI_FIXTURE:
        kb = kb.instantiate_template(
            RACI_TEMPLATE,
            {"role": f"role:{role}", "action": f"action:{action}", "level": f"raci:{level}"},
        )

    for term, definition in TERMS:
        kb = kb.assert_individual(f"term:{term}", (APP_TERM,))
        kb = kb.instantiate_template(
            TERM_TEMPLATE,
            {"term": f"term:{term}", "definition": kbmod.Literal(definition)},
        )

    for zone_id in sorted(registry.zones):
        kb = kb.assert_individual(f"zone:{zone_id}", (APP_SAMPLING_ZONE,))
    for point_id in sorted(registry.points):
        point = registry.points[point_id]
        kb = kb.assert_individual(f"pt:{point_id}", (APP_SAMPLING_POINT,))
        kb = kb.assert_relation(f"pt:{point_id}", APP_LOCATED_IN_ZONE, f"zone:{point.zone_id}")
        kb = kb.assert_relation(
            f"pt:{point_id}", APP_HAS_WATER_TYPE, kbmod.Literal(point.water_type.value)
        )
    return kb


def build_raci(kb: kbmod.KnowledgeBase | None = None) -> RaciMatrix:
    return RaciMatrix.from_kb(kb if kb is not None else build_kb())


def demo_worksheet_text(day: date, include_unknown_row: bool = False) -> str:
    """A small delimited worksheet for the demo registry."""
    rows = [
        ("Z-A", "M-STD", "P-101"),
        ("Z-A", "M-STD", "P-102"),
        ("Z-A", "M-CFU", "P-103"),
        ("Z-A", "M-STD", "P-104"),
        ("Z-B", "M-STD", "P-201"),
        ("Z-B", "M-CFU", "P-202"),
        ("Z-B", "M-STD", "P-203"),
    ]
    lines = [DELIMITER.join(EXPORT_COLUMNS[:4])]
    for zone_id, method_id, point_id in rows:
        lines.append(DELIMITER.join((zone_id, method_id, point_id, day.isoformat())))
    if include_unknown_row:
        lines.append(DELIMITER.join(("Z-A", "M-STD", "P-999", day.isoformat())))
    return "\n".join(lines) + "\n"


def write_sample_data(target: str | Path, day: date | None = None) -> Path:
    """Materialize registry, knowledge base, config, and a drop-ready worksheet."""
    base = Path(target)
    day = day or (date.today() + timedelta(days=0))
    registry = build_registry()
    (base / "registry").mkdir(parents=True, exist_ok=True)
    save_registry(registry, base / "registry")
    kbmod.save_kb(build_kb(registry), base / "kb.txt")
    (base / "dropbox").mkdir(exist_ok=True)
    (base / "media").mkdir(exist_ok=True)
    (base / "worksheet.txt").write_text(demo_worksheet_text(day), encoding="utf-8")
    (base / "config.json").write_text(
        '{\n  "listen": "127.0.0.1:8000",\n'
        f'  "data_dir": "{base.as_posix()}",\n'
        f'  "drop_dir": "{(base / "dropbox").as_posix()}",\n'
        '  "inter_zone_penalty": 5.0\n}\n',
        encoding="utf-8",
    )
    return base


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print("usage: python -m aquasampler.fixtures <target-dir>", file=sys.stderr)
        raise SystemExit(1)
    created = write_sample_data(sys.argv[1])
    print(f"sample data written to {created}")

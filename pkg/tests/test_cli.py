import io
import contextlib
from datetime import date
from pathlib import Path

import pytest

from aquasampler import cli, fixtures, workflow

from conftest import DAY, ts

GOLDEN = Path(__file__).parent / "golden"
ALL_STEPS = ["flush outlet", "fill bottle", "seal and label"]


def run_cli(args):
    buf = io.StringIO()
    err = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(err):
        code = cli.run(args)
    return code, buf.getvalue(), err.getvalue()


@pytest.fixture()
def data_dir(tmp_path):
    return fixtures.write_sample_data(tmp_path / "data", DAY)


@pytest.fixture()
def seeded_data_dir(data_dir, registry, raci):
    """Data dir with the demo worksheet loaded and a deterministic history."""
    from conftest import seed_demo_history

    seed_demo_history(data_dir, registry, raci)
    return data_dir


class TestGoldenOutputs:
    def test_validate_porcelain(self, data_dir):
        worksheet = data_dir / "bad-row.txt"
        worksheet.write_text(
            fixtures.demo_worksheet_text(DAY, include_unknown_row=True), encoding="utf-8"
        )
        code, out, _ = run_cli(
            ["--data-dir", str(data_dir), "--porcelain", "validate", str(worksheet)]
        )
        assert code == 0
        assert out == (GOLDEN / "validate.txt").read_text()

    def test_route_porcelain(self, seeded_data_dir):
        code, out, _ = run_cli(
            [
                "--data-dir", str(seeded_data_dir), "--porcelain",
                "route", "--date", "2024-03-05", "--start", "P-000",
            ]
        )
        assert code == 0
        assert out == (GOLDEN / "route.txt").read_text()

    def test_report_porcelain(self, seeded_data_dir):
        code, out, _ = run_cli(
            [
                "--data-dir", str(seeded_data_dir), "--porcelain",
                "report", "--date", "2024-03-05",
            ]
        )
        assert code == 0
        assert out == (GOLDEN / "report.txt").read_text()


class TestThinAdapter:
    def test_route_matches_direct_module_call(self, seeded_data_dir, registry):
        from aquasampler import sequencer

        code, out, _ = run_cli(
            [
                "--data-dir", str(seeded_data_dir), "--porcelain",
                "route", "--date", "2024-03-05", "--start", "P-000", "--zone", "Z-A",
            ]
        )
        assert code == 0
        engine = workflow.recover_engine(
            registry, fixtures.build_raci(), seeded_data_dir / "audit.log"
        )
        tasks = [
            t
            for t in engine.worksheet(DAY).tasks
            if registry.points[t.point_id].zone_id == "Z-A"
        ]
        plan = sequencer.sequence_route(tasks, "P-000", registry)
        plan_line = out.splitlines()[0].split("\t")
        assert plan_line[3] == f"{plan.total_cost:.6f}"
        assert [line.split("\t")[3] for line in out.splitlines()[1:]] == list(plan.task_order)


class TestVerbs:
    def test_validate_human_output(self, data_dir):
        worksheet = data_dir / "ws.txt"
        worksheet.write_text(fixtures.demo_worksheet_text(DAY), encoding="utf-8")
        code, out, _ = run_cli(["--data-dir", str(data_dir), "validate", str(worksheet)])
        assert code == 0
        assert "accepted 7, rejected 0" in out

    def test_ingest_then_export_roundtrip(self, data_dir):
        code, out, _ = run_cli(
            ["--data-dir", str(data_dir), "ingest", str(data_dir / "worksheet.txt")]
        )
        assert code == 0
        out_file = data_dir / "export.txt"
        code, _, _ = run_cli(
            [
                "--data-dir", str(data_dir),
                "export", "--date", DAY.isoformat(), "--out", str(out_file),
            ]
        )
        assert code == 0
        exported = out_file.read_text()
        assert exported.count("\n") == 8  # header + 7 rows
        assert "Untouched" in exported

    def test_kb_load(self, data_dir):
        code, out, _ = run_cli(
            ["--data-dir", str(data_dir), "--porcelain", "kb-load", str(data_dir / "kb.txt")]
        )
        assert code == 0
        assert "findings\t0" in out

    def test_kb_query(self, data_dir):
        code, out, _ = run_cli(
            [
                "--data-dir", str(data_dir), "--porcelain",
                "kb-query", "?p app:locatedInZone zone:Z-A", "--kb", str(data_dir / "kb.txt"),
            ]
        )
        assert code == 0
        assert out.splitlines()[0] == "rows\t5"
        assert "row\tp=pt:P-101" in out

    def test_export_missing_worksheet_is_data_error(self, data_dir):
        code, _, err = run_cli(
            ["--data-dir", str(data_dir), "export", "--date", "2030-01-01"]
        )
        assert code == 2

    def test_usage_error_exit_1(self):
        code, _, err = run_cli(["frobnicate"])
        assert code == 1
        assert "usage error" in err

    def test_help_lists_all_verbs(self):
        code, out, _ = run_cli(["--help"])
        assert code == 0
        for verb in ("ingest", "validate", "kb-load", "kb-query", "route", "report", "serve", "export"):
            assert verb in out

    def test_missing_file_is_data_error(self, data_dir):
        code, _, err = run_cli(["--data-dir", str(data_dir), "validate", "no-such-file.txt"])
        assert code == 2

    def test_bad_config_exit_1(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        code, _, err = run_cli(["--config", str(bad), "report", "--date", "2024-03-05"])
        assert code == 1
        assert "config error" in err

    def test_corrupt_audit_exit_2(self, seeded_data_dir):
        audit = seeded_data_dir / "audit.log"
        lines = audit.read_text().splitlines()
        audit.write_text("\n".join(lines[:1] + lines[2:]) + "\n")  # drop an event
        code, _, err = run_cli(
            ["--data-dir", str(seeded_data_dir), "report", "--date", "2024-03-05"]
        )
        assert code == 2
        assert "data corruption" in err

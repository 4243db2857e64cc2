from __future__ import annotations

import json
import shutil
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from conftest import APPS, PACKAGES, STATS_CORPUS, VARIANTS
from graph_oracle import read_dot
from xbound.cli import main
from xbound.graph import BOUNDARY_LABEL

SCHEMA = json.loads(resources.files("xbound").joinpath("report.schema.json").read_text(encoding="utf-8"))


def run_json(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--json", str(out)])
    return code, json.loads(out.read_text(encoding="utf-8")), out


def vulnerable(report):
    return [f for p in report["packages"] for f in p["findings"] if f["verdict"] == "Vulnerable"]


# scan

def test_scan_corpus_exits_one_with_two_vulnerable(tmp_path):
    code, report, _ = run_json(["scan", str(PACKAGES)], tmp_path)
    assert code == 1
    assert len(report["packages"]) == 4
    assert len(vulnerable(report)) == 2
    names = {p["package"] for p in report["packages"] if any(f["verdict"] == "Vulnerable" for f in p["findings"])}
    assert names == {"nativepad", "zopfli-like"}


def test_scan_empty_root_exits_zero(tmp_path):
    root = tmp_path / "empty"
    root.mkdir()
    code, report, _ = run_json(["scan", str(root)], tmp_path)
    assert code == 0 and report["packages"] == []


def test_scan_unreadable_root_exits_two(tmp_path, capsys):
    assert main(["scan", str(tmp_path / "missing")]) == 2
    assert "not a readable directory" in capsys.readouterr().err


def test_bad_rules_file_exits_two_naming_the_line(tmp_path, capsys):
    bad = tmp_path / "bad.rules"
    bad.write_text('sink native M3 "a()"\nfrobnicate everything\n')
    assert main(["scan", str(PACKAGES), "--rules", str(bad)]) == 2
    assert f"{bad}:2:" in capsys.readouterr().err


def test_emit_dot_writes_boundary_edge(tmp_path):
    dots = tmp_path / "dots"
    code, _, _ = run_json(["scan", str(PACKAGES / "nativepad"), "--emit-dot", str(dots)], tmp_path)
    assert code == 1
    files = sorted(dots.glob("*.dot"))
    assert len(files) == 1
    nodes, edges = read_dot(files[0].read_text())
    assert [e for e in edges if e[2] == BOUNDARY_LABEL]
    assert {c for _, c in nodes.values()} == {"blue", "green"}


def test_report_shape(tmp_path):
    _, report, _ = run_json(["scan", str(PACKAGES / "nativepad")], tmp_path)
    assert list(report) == ["version", "config", "packages", "app_findings"]
    pkg = report["packages"][0]
    for key in ("inventory", "findings", "diagnostics", "elapsed_ms"):
        assert key in pkg
    f = pkg["findings"][0]
    for key in ("misuse", "verdict", "sink", "witness_path", "sanitizers"):
        assert key in f
    assert pkg["elapsed_ms"] is None


def test_timing_flag_records_elapsed(tmp_path):
    _, report, _ = run_json(["scan", str(PACKAGES / "nativepad"), "--timing"], tmp_path)
    assert isinstance(report["packages"][0]["elapsed_ms"], float)


def test_scan_is_byte_identical_across_runs(tmp_path):
    roots = [str(PACKAGES), str(VARIANTS)]
    _, _, a = run_json(["scan", *roots], tmp_path, "a.json")
    _, _, b = run_json(["scan", *roots], tmp_path, "b.json")
    assert a.read_bytes() == b.read_bytes()


def test_parallel_and_serial_reports_agree(tmp_path, monkeypatch):
    monkeypatch.setenv("XBOUND_JOBS", "1")
    _, _, serial = run_json(["scan", str(PACKAGES)], tmp_path, "serial.json")
    monkeypatch.setenv("XBOUND_JOBS", "4")
    _, _, parallel = run_json(["scan", str(PACKAGES)], tmp_path, "parallel.json")
    assert serial.read_bytes() == parallel.read_bytes()


def test_nonpositive_budget_is_rejected():
    assert main(["scan", str(PACKAGES), "--budget-seconds", "0"]) == 2


# app

def test_app_sqlite_listing(tmp_path):
    code, report, _ = run_json(["app", str(APPS / "sqlite_ideas")], tmp_path)
    assert code == 1
    assert [(f["source"], f["entity"]) for f in report["app_findings"]] == [("req.body", "req.body")]


def test_app_known_false_positive_still_exits_one(tmp_path):
    meta = json.loads((APPS / "rides_fp" / "fixture.json").read_text())
    assert meta["known_fp"] is True
    code, report, _ = run_json(["app", str(APPS / "rides_fp")], tmp_path)
    assert code == 1 and len(report["app_findings"]) == meta["expected_findings"]
    assert "known_fp" not in json.dumps(report)


def test_app_without_rule_api_exits_zero(tmp_path):
    code, report, _ = run_json(["app", str(APPS / "clean")], tmp_path)
    assert code == 0 and report["app_findings"] == []


def test_app_missing_root_exits_two(tmp_path):
    assert main(["app", str(tmp_path / "nope")]) == 2


def test_app_rules_override(tmp_path):
    rules = tmp_path / "only-encode.rules"
    rules.write_text('sink native M3 "a()"\napprole "encode(tracked)" sources req.body\n')
    code, report, _ = run_json(["app", str(APPS / "rules7" / "sqlite3"), "--rules", str(rules)], tmp_path)
    assert code == 0 and report["app_findings"] == []


def test_app_depth_zero_misses_helper_flow(tmp_path):
    code, _, _ = run_json(["app", str(APPS / "inter"), "--depth", "0"], tmp_path)
    assert code == 0
    code, _, _ = run_json(["app", str(APPS / "inter"), "--depth", "1"], tmp_path)
    assert code == 1


# stats

def test_stats_pure_script_package(capsys):
    assert main(["stats", str(STATS_CORPUS / "pure-js")]) == 0
    assert "no C/C++ code" in capsys.readouterr().out


def test_stats_nativepad_headers(tmp_path):
    code, data, _ = run_json(["stats", str(PACKAGES / "nativepad")], tmp_path)
    assert code == 0
    assert data["packages"][0]["headers"] == ["node_api.h"]


def test_stats_histogram_equals_construction(tmp_path):
    expected = json.loads((STATS_CORPUS / "composition.json").read_text())
    _, data, _ = run_json(["stats", str(STATS_CORPUS)], tmp_path)
    summary = data["summary"]
    for key in ("packages", "with_native_code", "without_native_code", "headers", "direct_export", "bindings"):
        assert summary[key] == expected[key], key
    no_native = sorted(p["package"] for p in data["packages"] if not p["has_native_code"])
    assert no_native == expected["no_native"]


# schema

def _scan_reports(tmp_path):
    roots = [PACKAGES, VARIANTS, STATS_CORPUS] + sorted(p for p in PACKAGES.iterdir()) + sorted(VARIANTS.iterdir())
    for i, root in enumerate(roots):
        yield root, run_json(["scan", str(root)], tmp_path, f"s{i}.json")[1]


def test_every_scan_report_validates(tmp_path):
    for root, report in _scan_reports(tmp_path):
        jsonschema.validate(report, SCHEMA)


def test_every_app_report_validates(tmp_path):
    apps = [p for p in sorted(APPS.iterdir()) if p.name != "rules7"] + sorted((APPS / "rules7").iterdir())
    for i, app in enumerate(apps):
        _, report, _ = run_json(["app", str(app)], tmp_path, f"a{i}.json")
        jsonschema.validate(report, SCHEMA)


def test_schema_rejects_vulnerable_with_sanitizers(tmp_path):
    _, report, _ = run_json(["scan", str(PACKAGES / "nativepad")], tmp_path)
    f = report["packages"][0]["findings"][0]
    f["sanitizers"] = [{"file": "index.js", "line": 3, "col": 4}]
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(report, SCHEMA)


# entry point

@pytest.mark.skipif(shutil.which("xbound") is None, reason="console script not installed")
def test_console_script_runs(tmp_path):
    out = subprocess.run(["xbound", "scan", str(PACKAGES / "iltorb_like")], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["packages"][0]["findings"][0]["verdict"] == "SanitizedHighLevel"


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "xbound", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("xbound ")

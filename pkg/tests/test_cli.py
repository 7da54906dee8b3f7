import json
import subprocess
import sys

import pytest

from v2g_audit.cli import build_parser, config_from_args, main
from v2g_audit.graph import PropertyGraph
from v2g_audit.report import from_structured


@pytest.fixture
def fixtures(golden_dir):
    return {name: golden_dir / f"{name}.dxf" for name in ("mp_fixture", "mg_fixture", "compliant_fixture")}


def test_audit_compliant_exit_0(fixtures, capsys):
    assert main(["audit", str(fixtures["compliant_fixture"])]) == 0
    assert "10 pass" in capsys.readouterr().out


def test_audit_mp_exit_2(fixtures, tmp_path):
    assert main(["audit", str(fixtures["mp_fixture"]), "--out", str(tmp_path)]) == 2
    report = from_structured((tmp_path / "mp_fixture.report.json").read_bytes())
    assert report.status_of("MP") == "fail"
    assert (tmp_path / "mp_fixture.report.txt").exists()


def test_audit_unreadable_exit_1(tmp_path, capsys):
    assert main(["audit", str(tmp_path / "nope.dxf")]) == 1
    bad = tmp_path / "bad.dxf"
    bad.write_text("0\nLINE\n10\n")
    assert main(["audit", str(bad)]) == 1
    assert "OddLineCount" in capsys.readouterr().err


def test_audit_indeterminate_exit_3(tmp_path):
    rules = tmp_path / "rules.json"
    rules.write_text(json.dumps([{"id": "Q", "text": "Connected devices must have matching polarity",
                                  "category": "Wiring"}]))
    empty = tmp_path / "empty.dxf"
    empty.write_text("0\nEOF\n")
    assert main(["audit", str(empty), "--rules", str(rules), "--format", "text"]) == 3


def test_malformed_entity_reports_handle(tmp_path, capsys):
    bad = tmp_path / "z.dxf"
    bad.write_text("0\nLINE\n5\nBEEF\n10\n0\n20\n0\n30\n2\n11\n1\n21\n0\n")
    assert main(["audit", str(bad)]) == 1
    assert "BEEF" in capsys.readouterr().err


def test_graph_dump(fixtures, tmp_path, capsys):
    assert main(["graph", str(fixtures["compliant_fixture"])]) == 0
    data = capsys.readouterr().out.encode()
    g = PropertyGraph.from_json(data)
    assert sum(n.kind.value == "CurrentTransformer" for n in g.nodes) == 3
    assert g.to_json() == data
    out = tmp_path / "g.json"
    assert main(["graph", str(fixtures["compliant_fixture"]), "--out", str(out)]) == 0
    assert out.read_bytes() == data


def test_graph_single_ct(tmp_path, capsys):
    dxf = tmp_path / "ct.dxf"
    dxf.write_text(
        "0\nSECTION\n2\nBLOCKS\n0\nBLOCK\n2\nCT\n10\n0\n20\n0\n0\nCIRCLE\n5\nB1\n10\n0\n20\n0\n40\n1.5\n"
        "0\nENDBLK\n0\nENDSEC\n0\nSECTION\n2\nENTITIES\n0\nINSERT\n5\nA\n2\nCT\n10\n1\n20\n2\n0\nENDSEC\n0\nEOF\n"
    )
    assert main(["graph", str(dxf)]) == 0
    g = json.loads(capsys.readouterr().out)
    assert [n["kind"] for n in g["nodes"]] == ["CurrentTransformer"]


def test_graph_empty(tmp_path, capsys):
    empty = tmp_path / "e.dxf"
    empty.write_text("0\nEOF\n")
    assert main(["graph", str(empty)]) == 0
    assert json.loads(capsys.readouterr().out) == {"nodes": [], "edges": []}


def test_config_file_and_overrides(tmp_path):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"tau": 0.25, "text_radius": 4.0, "ablate": ["no-attrs"]}))
    args = build_parser().parse_args(["audit", "x.dxf", "--config", str(cfg_file), "--tau", "0.3"])
    cfg = config_from_args(args)
    assert cfg.tau == 0.3 and cfg.text_radius == 4.0 and cfg.ablate == ("no-attrs",)


def test_nonpositive_tolerance_rejected(fixtures):
    assert main(["audit", str(fixtures["compliant_fixture"]), "--tau", "0"]) == 1


def test_bench_small_generated(tmp_path, capsys):
    args = ["bench", "--generate", "--per-kind", "2", "--variants", "10", "--seed", "3",
            "--ablate", "no-gsp", "--out", str(tmp_path), "--bootstrap", "1000"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert "Overall" in first and "McNemar" in first
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["runs"]["full"]["accuracy"]["Overall"] == 1.0
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_bench_manifest(tmp_path, capsys):
    suite_dir = tmp_path / "suite"
    assert main(["bench", "--generate", "--per-kind", "2", "--variants", "10",
                 "--write-suite", str(suite_dir), "--bootstrap", "1000"]) == 0
    capsys.readouterr()
    assert main(["bench", str(suite_dir / "manifest.json"), "--bootstrap", "1000"]) == 0
    assert "100.0%" in capsys.readouterr().out
    assert main(["bench", str(tmp_path / "missing.json")]) == 1


def test_console_entry_point(fixtures):
    proc = subprocess.run(
        [sys.executable, "-m", "v2g_audit.cli", "audit", str(fixtures["mp_fixture"]), "--format", "structured"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
    assert json.loads(proc.stdout)["summary"]["total"]["fail"] == 3

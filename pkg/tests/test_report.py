import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from v2g_audit.checks import CheckOutcome, Evidence
from v2g_audit.errors import EmptyRegion, NoTemplateMatch
from v2g_audit.graph import NodeKind
from v2g_audit.pipeline import audit_bytes
from v2g_audit.planner import CATEGORIES, Rule, StructuredQuery
from v2g_audit.report import (
    FAIL,
    INDETERMINATE,
    PASS,
    ComplianceReport,
    aggregate,
    exit_status,
    from_structured,
    to_structured,
    to_text,
)

FIXTURES = ("mp_fixture", "mg_fixture", "compliant_fixture")


def _rule(i, cat="Wiring"):
    return Rule(f"R{i}", f"rule {i}", cat)


def test_all_pass_summary():
    items = [(_rule(i), CheckOutcome("check_open_circuit", 1)) for i in range(10)]
    report = aggregate(items)
    assert report.summary["total"] == {PASS: 10, FAIL: 0, INDETERMINATE: 0}
    assert exit_status(report) == 0


def test_planner_failure_is_indeterminate():
    report = aggregate([(_rule(0), NoTemplateMatch("R0"))])
    (entry,) = report.entries
    assert entry.status == INDETERMINATE and entry.passed is None and "NoTemplateMatch" in entry.error
    assert exit_status(report) == 3


def test_empty_region_keeps_query():
    q = StructuredQuery("CT_secondary", "check_polarity")
    (entry,) = aggregate([(_rule(0), EmptyRegion("check_polarity", "x"), q, ["note"])]).entries
    assert entry.region == "CT_secondary" and entry.function_id == "check_polarity"
    assert entry.planner_diagnostics == ("note",)


def test_unsupported_result_rejected():
    with pytest.raises(TypeError):
        aggregate([(_rule(0), "pass")])


def test_empty_report():
    report = aggregate([])
    d = json.loads(to_structured(report))
    assert d["entries"] == []
    assert all(v == {PASS: 0, FAIL: 0, INDETERMINATE: 0} for v in d["summary"].values())
    assert exit_status(report) == 0


outcomes = st.one_of(
    st.builds(lambda: CheckOutcome("check_polarity", 1)),
    st.builds(
        lambda ref, msg: CheckOutcome("check_polarity", 0, (Evidence(ref, msg),)),
        st.one_of(st.none(), st.integers(0, 50), st.tuples(st.integers(0, 50), st.integers(0, 50))),
        st.text(min_size=1, max_size=20),
    ),
    st.builds(lambda: EmptyRegion("check_polarity", "nothing")),
)


@given(st.lists(st.tuples(st.sampled_from(CATEGORIES), outcomes), max_size=12))
def test_canonical_round_trip_and_conservation(items):
    report = aggregate([(_rule(i, c), o) for i, (c, o) in enumerate(items)], {"path": "x.dxf"})
    first = to_structured(report)
    assert to_structured(from_structured(first)) == first
    assert from_structured(first) == report
    # entry order follows rule order
    assert [e.rule_id for e in report.entries] == [f"R{i}" for i in range(len(items))]
    s = report.summary
    assert s["total"][PASS] == sum(e.status == PASS for e in report.entries)
    assert sum(s[c][PASS] for c in CATEGORIES) == s["total"][PASS]
    statuses = {e.status for e in report.entries}
    expected = 2 if FAIL in statuses else 3 if INDETERMINATE in statuses else 0
    assert exit_status(report) == expected


@pytest.mark.parametrize("name", FIXTURES)
def test_golden_reports(name, golden_dir, rules):
    dxf = (golden_dir / f"{name}.dxf").read_bytes()
    _, report = audit_bytes(dxf, rules, source=f"{name}.dxf")
    assert to_structured(report) == (golden_dir / f"{name}.report.json").read_bytes()
    assert to_text(report) == (golden_dir / f"{name}.report.txt").read_text(encoding="utf-8")
    frozen = (golden_dir / f"{name}.report.json").read_bytes()
    assert to_structured(from_structured(frozen)) == frozen


def test_mp_fixture_names_two_grounds(golden_dir, rules):
    graph, report = audit_bytes((golden_dir / "mp_fixture.dxf").read_bytes(), rules)
    entry = report.entry("MP")
    assert entry.status == FAIL
    ids = {i for e in entry.evidence for i in e.node_ids()}
    assert len(ids) == 2 and all(graph.node(i).kind == NodeKind.GROUND for i in ids)
    assert exit_status(report) == 2


def test_compliant_fixture_all_pass(golden_dir, rules):
    _, report = audit_bytes((golden_dir / "compliant_fixture.dxf").read_bytes(), rules)
    assert report.summary["total"] == {PASS: 10, FAIL: 0, INDETERMINATE: 0}


def test_text_rendering_lists_every_rule():
    report = aggregate([(_rule(0), CheckOutcome("f", 0, (Evidence(3, "bad thing"),)))])
    text = to_text(report)
    assert "R0" in text and "FAIL" in text and "bad thing" in text and text.endswith("\n")
    assert isinstance(report, ComplianceReport)

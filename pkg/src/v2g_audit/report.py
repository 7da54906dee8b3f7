"""Compliance report: one entry per rule, JSON and plain-text renderings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .checks import CheckOutcome, Evidence
from .errors import V2GError
from .planner import CATEGORIES, Rule, StructuredQuery

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"
STATUSES = (PASS, FAIL, INDETERMINATE)


@dataclass(frozen=True)
class ReportEntry:
    rule_id: str
    category: str
    status: str
    function_id: str | None = None
    region: str | None = None
    evidence: tuple[Evidence, ...] = ()
    planner_diagnostics: tuple[str, ...] = ()
    error: str | None = None

    @property
    def passed(self) -> int | None:
        return {PASS: 1, FAIL: 0}.get(self.status)

    def to_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "category": self.category,
            "status": self.status,
            "pass": self.passed,
            "violation": None if self.status == INDETERMINATE else self.status == FAIL,
            "function": self.function_id,
            "region": self.region,
            "evidence": [{"ref": _ref_out(e.ref), "message": e.message} for e in self.evidence],
            "planner_diagnostics": list(self.planner_diagnostics),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ReportEntry":
        return cls(
            d["rule_id"],
            d["category"],
            d["status"],
            d.get("function"),
            d.get("region"),
            tuple(Evidence(_ref_in(e["ref"]), e["message"]) for e in d.get("evidence", [])),
            tuple(d.get("planner_diagnostics", [])),
            d.get("error"),
        )


def _ref_out(ref):
    return list(ref) if isinstance(ref, tuple) else ref


def _ref_in(ref):
    return tuple(ref) if isinstance(ref, list) else ref


@dataclass(frozen=True)
class ComplianceReport:
    entries: tuple[ReportEntry, ...] = ()
    source: Mapping[str, str] = field(default_factory=dict)

    @property
    def summary(self) -> dict:
        table = {c: {s: 0 for s in STATUSES} for c in CATEGORIES}
        for e in self.entries:
            table.setdefault(e.category, {s: 0 for s in STATUSES})[e.status] += 1
        table["total"] = {s: sum(1 for e in self.entries if e.status == s) for s in STATUSES}
        return table

    def status_of(self, rule_id: str) -> str:
        for e in self.entries:
            if e.rule_id == rule_id:
                return e.status
        raise KeyError(rule_id)

    def entry(self, rule_id: str) -> ReportEntry:
        for e in self.entries:
            if e.rule_id == rule_id:
                return e
        raise KeyError(rule_id)

    def to_dict(self) -> dict:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "source": dict(self.source),
            "summary": self.summary,
        }


def aggregate(outcomes: Iterable[Sequence], source: Mapping[str, str] | None = None) -> ComplianceReport:
    """Build a report from ``(rule, outcome_or_error[, query[, diagnostics]])`` items.

    Errors (planner failure, empty region, ...) become indeterminate entries.
    """
    entries = []
    for item in outcomes:
        rule: Rule = item[0]
        result = item[1]
        query: StructuredQuery | None = item[2] if len(item) > 2 else None
        notes = tuple(item[3]) if len(item) > 3 else ()
        function_id = query.function if query else None
        region = query.region if query else None
        if isinstance(result, CheckOutcome):
            entries.append(
                ReportEntry(
                    rule.id,
                    rule.category,
                    PASS if result.passed else FAIL,
                    result.function_id,
                    region,
                    result.evidence,
                    notes,
                )
            )
        elif isinstance(result, (V2GError, ValueError)):
            entries.append(
                ReportEntry(
                    rule.id,
                    rule.category,
                    INDETERMINATE,
                    function_id,
                    region,
                    (),
                    notes,
                    f"{type(result).__name__}: {result}",
                )
            )
        else:
            raise TypeError(f"rule {rule.id}: unsupported result {type(result).__name__}")
    return ComplianceReport(tuple(entries), dict(source or {}))


def to_structured(report: ComplianceReport) -> bytes:
    text = json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def from_structured(data: bytes | str) -> ComplianceReport:
    d = json.loads(data)
    return ComplianceReport(
        tuple(ReportEntry.from_dict(e) for e in d.get("entries", [])),
        dict(d.get("source", {})),
    )


def to_text(report: ComplianceReport) -> str:
    lines = []
    width = max((len(e.rule_id) for e in report.entries), default=4)
    for e in report.entries:
        if e.evidence:
            detail = e.evidence[0].message
        elif e.error:
            detail = e.error
        else:
            detail = "ok"
        where = f"{e.function_id} @ {e.region}" if e.function_id else "unplanned"
        lines.append(f"{e.rule_id:<{width}}  {e.status.upper():<13}  {where}: {detail}")
    s = report.summary
    per_cat = ", ".join(
        f"{c} {s[c][PASS]}/{s[c][FAIL]}/{s[c][INDETERMINATE]}" for c in CATEGORIES
    )
    t = s["total"]
    lines.append(f"-- {t[PASS]} pass, {t[FAIL]} fail, {t[INDETERMINATE]} indeterminate ({per_cat})")
    return "\n".join(lines) + "\n"


def exit_status(report: ComplianceReport) -> int:
    """0 all pass, 2 any failure, 3 indeterminate without failure."""
    statuses = {e.status for e in report.entries}
    if FAIL in statuses:
        return 2
    if INDETERMINATE in statuses:
        return 3
    return 0

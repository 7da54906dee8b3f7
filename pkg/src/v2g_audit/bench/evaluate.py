"""Run the pipeline over a suite and score it at instance and base-case level."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..checks import Evidence
from ..dxf import Similarity
from ..errors import V2GError
from ..graph import PropertyGraph
from ..pipeline import AuditConfig, audit_document
from ..planner import Rule, load_rules
from ..report import ComplianceReport
from .augment import Variant, augment
from .generator import BENCH_CATEGORIES, CATEGORY_OF, BaseCase, Injection, default_suite

OVERALL = "Overall"
ANCHOR_TOL = 1e-6

Suite = Sequence[tuple[BaseCase, Sequence[Variant]]]


@dataclass(frozen=True)
class InstanceResult:
    case_id: str
    kind: str
    family: str  # "parent" for the untransformed base case
    statuses: dict[str, str]
    correct: bool
    evidence_ok: bool
    error: str | None = None


@dataclass
class EvalResult:
    instances: list[InstanceResult]
    parents: dict[str, InstanceResult]
    base_correct: dict[str, bool]
    accuracy: dict[str, float]
    config: dict = field(default_factory=dict)

    @property
    def instance_accuracy(self) -> float:
        return sum(r.correct for r in self.instances) / len(self.instances) if self.instances else math.nan

    def base_bits(self, category: str = OVERALL) -> list[bool]:
        return [ok for cid, ok in sorted(self.base_correct.items()) if category == OVERALL or _category(cid) == category]

    def paired_with(self, other: "EvalResult") -> list[tuple[bool, bool]]:
        """(self correct, other correct) per shared base case, sorted by case id."""
        shared = sorted(set(self.base_correct) & set(other.base_correct))
        return [(self.base_correct[c], other.base_correct[c]) for c in shared]

    def invariance_violations(self) -> list[tuple[str, str]]:
        """(case id, family) of every variant whose rule statuses differ from its parent's."""
        return [
            (r.case_id, r.family)
            for r in self.instances
            if r.case_id in self.parents and r.statuses != self.parents[r.case_id].statuses
        ]

    def evidence_failures(self) -> list[tuple[str, str]]:
        return [(r.case_id, r.family) for r in self.instances if not r.evidence_ok]

    def table(self) -> str:
        cols = list(BENCH_CATEGORIES) + [OVERALL]
        head = "  ".join(f"{c:>8}" for c in cols)
        row = "  ".join(f"{100 * self.accuracy[c]:7.1f}%" for c in cols)
        return f"{head}\n{row}\n"

    def to_dict(self) -> dict:
        return {
            "accuracy": dict(self.accuracy),
            "instance_accuracy": self.instance_accuracy,
            "base_correct": dict(sorted(self.base_correct.items())),
            "instances": len(self.instances),
            "config": dict(self.config),
        }


def _category(case_id: str) -> str:
    return CATEGORY_OF[case_id.split("-", 1)[0]]


def aggregate_base_level(predictions: Iterable[tuple[str, bool]]) -> bool:
    """Combine (family, correct) pairs of one base case into a single verdict.

    Any correct rotation makes the rotation family correct; every other family
    needs a strict majority (ties count as incorrect); all families present
    must be correct.
    """
    by_family: dict[str, list[bool]] = defaultdict(list)
    for family, ok in predictions:
        by_family[family].append(bool(ok))
    if not by_family:
        return False
    for family, bits in by_family.items():
        if family == "rotation":
            if not any(bits):
                return False
        elif 2 * sum(bits) <= len(bits):
            return False
    return True


def evidence_names(
    report: ComplianceReport,
    graph: PropertyGraph,
    rule_id: str,
    injection: Injection,
    transform: Similarity | None = None,
    tol: float = ANCHOR_TOL,
) -> bool:
    """True when the rule's evidence points at every injected anchor and message."""
    entry = report.entry(rule_id)
    evidence: tuple[Evidence, ...] = entry.evidence
    anchors = [graph.node(i).anchor for e in evidence for i in e.node_ids() if i in graph.by_id]
    t = transform or Similarity()
    for a in injection.anchors:
        x, y = t.apply(a)
        if not any(math.hypot(x - u, y - v) <= tol * max(1.0, abs(x), abs(y)) for u, v in anchors):
            return False
    messages = " | ".join(e.message for e in evidence)
    return all(m in messages for m in injection.messages)


def _run_one(
    case: BaseCase,
    doc,
    family: str,
    transform: Similarity | None,
    rules: Sequence[Rule],
    cfg: AuditConfig,
) -> InstanceResult:
    try:
        graph, report = audit_document(doc, rules, cfg, source=case.case_id)
    except V2GError as exc:
        return InstanceResult(case.case_id, case.check_kind, family, {}, False, False, f"{type(exc).__name__}: {exc}")
    statuses = {e.rule_id: e.status for e in report.entries}
    target = case.check_kind
    correct = statuses.get(target) == case.ground_truth[target]
    evidence_ok = True
    if not case.compliant and correct:
        evidence_ok = evidence_names(report, graph, target, case.injection, transform)
    return InstanceResult(case.case_id, target, family, statuses, correct, evidence_ok)


def evaluate(
    suite: Suite,
    cfg: AuditConfig = AuditConfig(),
    rules: Sequence[Rule] | None = None,
) -> EvalResult:
    """Score every variant on its case's own rule, then aggregate per base case."""
    if not suite:
        raise ValueError("empty suite")
    rules = list(rules) if rules is not None else load_rules(cfg.rules)
    known = {r.id for r in rules}
    instances, parents, base_correct = [], {}, {}
    for case, variants in suite:
        if case.check_kind not in known:
            raise ValueError(f"no rule with id {case.check_kind}")
        doc = case.document
        if doc is None:
            from ..dxf import read_dxf

            doc = read_dxf(case.dxf)
        parents[case.case_id] = _run_one(case, doc, "parent", None, rules, cfg)
        mine = []
        for v in variants:
            vdoc = v.document
            if vdoc is None:
                from ..dxf import read_dxf

                vdoc = read_dxf(v.dxf)
            mine.append(_run_one(case, vdoc, v.family, v.transform, rules, cfg))
        instances.extend(mine)
        base_correct[case.case_id] = aggregate_base_level((r.family, r.correct) for r in mine)

    accuracy = {}
    for cat in BENCH_CATEGORIES:
        bits = [ok for cid, ok in base_correct.items() if _category(cid) == cat]
        accuracy[cat] = sum(bits) / len(bits) if bits else math.nan
    accuracy[OVERALL] = sum(base_correct.values()) / len(base_correct)
    return EvalResult(instances, parents, base_correct, accuracy, cfg.to_dict())


def build_suite(per_kind: int = 6, variants: int = 15, seed: int = 0, tau: float = 0.5) -> list[tuple[BaseCase, list[Variant]]]:
    """Default benchmark: per_kind base cases for each kind, `variants` variants each."""
    return [(c, augment(c, variants, seed=seed, tau=tau)) for c in default_suite(per_kind, base_seed=seed)]

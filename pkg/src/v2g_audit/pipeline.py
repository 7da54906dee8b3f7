"""End-to-end audit: DXF bytes -> property graph -> planned checks -> report."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from .builder import BuilderConfig, build_graph
from .checks import FUNCTIONS
from .dxf import Document, read_dxf
from .errors import NoTemplateMatch, V2GError
from .graph import PropertyGraph
from .planner import PlannerClient, Rule, plan_with_client, select_region
from .report import ComplianceReport, aggregate
from .spectral import DEFAULT_EPS

ABLATIONS = ("no-gsp", "no-attrs", "no-region")
FORMATS = ("structured", "text", "both")


@dataclass(frozen=True)
class AuditConfig:
    tau: float = 0.5
    text_radius: float = 5.0
    eps: float = DEFAULT_EPS
    rules: str | None = None
    planner_endpoint: str | None = None
    format: str = "both"
    ablate: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("tau", "text_radius", "eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        bad = set(self.ablate) - set(ABLATIONS)
        if bad:
            raise ValueError(f"unknown ablation(s) {sorted(bad)}")

    @property
    def builder(self) -> BuilderConfig:
        return BuilderConfig(tau=self.tau, text_radius=self.text_radius)

    def fingerprint(self) -> str:
        core = {"tau": self.tau, "text_radius": self.text_radius, "eps": self.eps, "ablate": sorted(self.ablate)}
        return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()[:12]

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "AuditConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        data.update({k: v for k, v in overrides.items() if v is not None})
        if "ablate" in data:
            data["ablate"] = tuple(data["ablate"])
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ablate"] = list(self.ablate)
        return d


def run_rules(
    graph: PropertyGraph,
    rules: Sequence[Rule],
    cfg: AuditConfig = AuditConfig(),
    client: PlannerClient | None = None,
) -> list[tuple]:
    """Plan, select and check every rule; errors are captured per rule."""
    if "no-gsp" in cfg.ablate:
        graph = graph.without_edges()
    if "no-attrs" in cfg.ablate:
        graph = graph.without_attributes()
    items = []
    for rule in rules:
        notes: list[str] = []
        try:
            query = plan_with_client(rule, client, diagnostics=notes)
        except NoTemplateMatch as exc:
            items.append((rule, exc, None, notes))
            continue
        region = "whole" if "no-region" in cfg.ablate else query.region
        params = dict(query.params)
        params.setdefault("eps", cfg.eps)
        try:
            sub = select_region(graph, region)
            outcome = FUNCTIONS[query.function](sub, params)
        except V2GError as exc:
            items.append((rule, exc, query, notes))
            continue
        items.append((rule, outcome, query, notes))
    return items


def audit_document(
    doc: Document,
    rules: Sequence[Rule],
    cfg: AuditConfig = AuditConfig(),
    client: PlannerClient | None = None,
    source: str = "",
) -> tuple[PropertyGraph, ComplianceReport]:
    graph = build_graph(doc, cfg.builder)
    items = run_rules(graph, rules, cfg, client)
    return graph, aggregate(items, {"path": source, "config": cfg.fingerprint()})


def audit_bytes(
    data: bytes,
    rules: Sequence[Rule],
    cfg: AuditConfig = AuditConfig(),
    client: PlannerClient | None = None,
    source: str = "",
) -> tuple[PropertyGraph, ComplianceReport]:
    return audit_document(read_dxf(data), rules, cfg, client, source)

"""Rule planning: natural-language rule -> (region selector, check function).

The default planner is a keyword-template table.  An optional remote planner
can be plugged in through ``plan_with_client``; its answers are validated
against the registries and replaced by the template result when invalid.
"""

from __future__ import annotations

import json
import logging
import os
import re
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Protocol, Sequence

from .checks import FUNCTIONS
from .errors import NoTemplateMatch, UnknownRegion
from .graph import EdgeKind, NodeKind, PropertyGraph
from .spectral import component_count_unionfind, induced_subgraph

log = logging.getLogger(__name__)

CATEGORIES = ("Grounding", "Wiring", "Labeling")
PER_CIRCUIT = "per_circuit:"
REGIONS = ("whole", "CT_secondary", "terminal_strip", PER_CIRCUIT + "<label>")
DEFAULT_TIMEOUT = 10.0


@dataclass(frozen=True)
class Rule:
    id: str
    text: str
    category: str

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"rule {self.id}: unknown category {self.category!r}")


@dataclass(frozen=True)
class StructuredQuery:
    region: str
    function: str
    params: Mapping[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"region": self.region, "function": self.function}
        if self.params:
            out["params"] = dict(sorted(self.params.items()))
        return out


@dataclass(frozen=True)
class Template:
    keywords: frozenset[str]
    region: str
    function: str
    params: Mapping[str, object] = field(default_factory=dict)


def _t(words: str, region: str, function: str, **params) -> Template:
    return Template(frozenset(words.split()), region, function, params)


# declaration order breaks ties
TEMPLATES: tuple[Template, ...] = (
    _t("ct secondary ground exactly one", "CT_secondary", "check_grounding_uniqueness"),
    _t("ground designated location only", "whole", "check_grounding_location"),
    _t("terminal unique id duplicate", "terminal_strip", "check_terminal_ids_duplicate"),
    _t("terminal id missing every label", "terminal_strip", "check_terminal_ids_missing"),
    _t("terminal label aligned order strip", "terminal_strip", "check_terminal_alignment"),
    _t("open continuous broken break", "whole", "check_open_circuit"),
    _t("polarity matching reversal", "CT_secondary", "check_polarity"),
    _t("short separate bridge inter", "whole", "check_short_circuit"),
    _t("phase three present", "CT_secondary", "check_missing_phase"),
    _t("loop cycle radial", "CT_secondary", "check_loop_anomaly", expected_beta=0),
)


@dataclass(frozen=True)
class Registry:
    functions: tuple[str, ...] = tuple(FUNCTIONS)
    regions: tuple[str, ...] = REGIONS
    templates: tuple[Template, ...] = TEMPLATES

    def has_region(self, name: str) -> bool:
        if name.startswith(PER_CIRCUIT):
            return bool(name[len(PER_CIRCUIT):]) and any(r.startswith(PER_CIRCUIT) for r in self.regions)
        return name in self.regions

    def validate(self, query: StructuredQuery) -> None:
        if query.function not in self.functions:
            raise ValueError(f"unregistered function {query.function!r}")
        if not self.has_region(query.region):
            raise ValueError(f"unregistered region {query.region!r}")


DEFAULT_REGISTRY = Registry()


def load_rules(path: str | Path | None = None) -> list[Rule]:
    if path is None:
        raw = resources.files("v2g_audit").joinpath("data/rules.json").read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    rules = [Rule(r["id"], r["text"], r["category"]) for r in json.loads(raw)]
    ids = [r.id for r in rules]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate rule ids")
    return rules


def _words(text: str) -> list[str]:
    return re.findall(r"[a-z0-9]+", text.lower())


def keyword_overlap(template: Template, words: Sequence[str]) -> int:
    return sum(1 for kw in template.keywords if any(w == kw or w.startswith(kw) for w in words))


def plan(rule: Rule, registry: Registry = DEFAULT_REGISTRY) -> StructuredQuery:
    if not registry.functions or not registry.regions:
        raise ValueError("empty registry")
    words = _words(rule.text)
    best, best_score = None, 0
    for template in registry.templates:
        score = keyword_overlap(template, words)
        if score > best_score:
            best, best_score = template, score
    if best is None:
        raise NoTemplateMatch(rule.id)
    query = StructuredQuery(best.region, best.function, dict(best.params))
    registry.validate(query)
    return query


# ---------------------------------------------------------------------------
# region selection
# ---------------------------------------------------------------------------


def select_region(g: PropertyGraph, region: str) -> PropertyGraph:
    if region == "whole":
        return g
    if region == "CT_secondary":
        conductors = g.filter_edges(lambda e: e.kind == EdgeKind.CONDUCTOR)
        part = component_count_unionfind(conductors)
        ct_comps = {part.assignment[n.id] for n in g.nodes if n.kind == NodeKind.CURRENT_TRANSFORMER}
        return induced_subgraph(conductors, lambda i: part.assignment[i] in ct_comps)
    if region == "terminal_strip":
        terms = {n.id for n in g.of_kind(NodeKind.TERMINAL)}
        keep = set(terms)
        for t in terms:
            keep.update(nb for nb in g.neighbors(t) if g.node(nb).kind == NodeKind.JUNCTION)
        return induced_subgraph(g, keep.__contains__)
    if region.startswith(PER_CIRCUIT) and len(region) > len(PER_CIRCUIT):
        label = region[len(PER_CIRCUIT):]
        return induced_subgraph(g, lambda i: g.node(i).get("circuit") == label)
    raise UnknownRegion(region)


# ---------------------------------------------------------------------------
# external planner seam
# ---------------------------------------------------------------------------


class PlannerClient(Protocol):
    def request(self, payload: Mapping) -> Mapping: ...


class TransportError(OSError):
    pass


class HTTPPlannerClient:
    """POSTs ``{"rule", "regions", "functions"}`` and expects a query object back."""

    def __init__(self, endpoint: str, api_key: str | None = None, timeout: float = DEFAULT_TIMEOUT):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout

    @classmethod
    def from_env(cls, endpoint: str | None = None) -> "HTTPPlannerClient | None":
        endpoint = endpoint or os.environ.get("PLANNER_ENDPOINT")
        if not endpoint:
            return None
        return cls(endpoint, os.environ.get("PLANNER_API_KEY"))

    def request(self, payload: Mapping) -> Mapping:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        req = urllib.request.Request(self.endpoint, data=body, method="POST")
        req.add_header("Content-Type", "application/json")
        if self.api_key:
            req.add_header("Authorization", f"Bearer {self.api_key}")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
            raise TransportError(str(exc)) from exc


def _query_from_response(resp: object, registry: Registry) -> StructuredQuery:
    if not isinstance(resp, Mapping):
        raise ValueError("response is not an object")
    region, function = resp.get("region"), resp.get("function")
    if not isinstance(region, str) or not isinstance(function, str):
        raise ValueError("response lacks region/function strings")
    params = resp.get("params") or {}
    if not isinstance(params, Mapping):
        raise ValueError("params must be an object")
    query = StructuredQuery(region, function, dict(params))
    registry.validate(query)
    return query


def plan_with_client(
    rule: Rule,
    client: PlannerClient | None = None,
    registry: Registry = DEFAULT_REGISTRY,
    diagnostics: list[str] | None = None,
) -> StructuredQuery:
    """Ask the remote planner once (one retry on transport failure), else fall back."""
    if client is None:
        return plan(rule, registry)
    notes = diagnostics if diagnostics is not None else []
    payload = {
        "rule": rule.text,
        "regions": list(registry.regions),
        "functions": list(registry.functions),
    }
    resp = None
    for attempt in (1, 2):
        try:
            resp = client.request(payload)
            break
        except (TransportError, OSError) as exc:
            notes.append(f"planner transport failure (attempt {attempt}): {exc}")
    if resp is not None:
        try:
            return _query_from_response(resp, registry)
        except (ValueError, TypeError) as exc:
            notes.append(f"planner response rejected: {exc}")
    notes.append("fell back to template planner")
    log.info("rule %s: %s", rule.id, notes[-1])
    return plan(rule, registry)

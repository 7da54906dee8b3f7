"""Verifier library: each check maps a region subgraph to a binary outcome.

Every check has the signature ``check(sub, params=None) -> CheckOutcome`` and
raises EmptyRegion when the region holds nothing the check can judge.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np

from .errors import EmptyRegion
from .graph import NodeKind, PropertyGraph
from .spectral import DEFAULT_EPS, bfs_distances, components, cycle_number, fundamental_cycles, shortest_path

Ref = Union[int, tuple[int, ...], None]


@dataclass(frozen=True)
class Evidence:
    ref: Ref
    message: str

    def node_ids(self) -> tuple[int, ...]:
        if self.ref is None:
            return ()
        if isinstance(self.ref, int):
            return (self.ref,)
        return tuple(self.ref)


@dataclass(frozen=True)
class CheckOutcome:
    function_id: str
    passed: int
    evidence: tuple[Evidence, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.passed not in (0, 1):
            raise ValueError("pass bit must be 0 or 1")
        if self.passed == 0 and not self.evidence:
            raise ValueError("a failing outcome needs evidence")


def _outcome(function_id: str, violations: list[Evidence]) -> CheckOutcome:
    return CheckOutcome(function_id, 0 if violations else 1, tuple(violations))


# ---------------------------------------------------------------------------
# grounding
# ---------------------------------------------------------------------------


def _eps(params: Mapping | None) -> float:
    return float((params or {}).get("eps", DEFAULT_EPS))


def grounding_counts(sub: PropertyGraph, eps: float = DEFAULT_EPS) -> list[tuple[list[int], list[int], list[int]]]:
    """(component members, CT ids, Ground ids) for every component holding a CT."""
    part = components(sub, eps=eps)
    out = []
    for members in part.members():
        kinds = [sub.node(i).kind for i in members]
        cts = [i for i, k in zip(members, kinds) if k == NodeKind.CURRENT_TRANSFORMER]
        if cts:
            grounds = [i for i, k in zip(members, kinds) if k == NodeKind.GROUND]
            out.append((members, cts, grounds))
    return out


def check_grounding_uniqueness(sub: PropertyGraph, params: Mapping | None = None) -> CheckOutcome:
    fid = "check_grounding_uniqueness"
    circuits = grounding_counts(sub, _eps(params))
    if not circuits:
        raise EmptyRegion(fid, "no current transformer in region")
    violations = []
    for members, cts, grounds in circuits:
        g = len(grounds)
        if g == 0:
            violations += [Evidence(ct, "CT circuit has g=0: missing ground") for ct in cts]
        elif g > 1:
            violations += [Evidence(gid, f"CT circuit has g={g}: multiple grounds") for gid in grounds]
    return _outcome(fid, violations)


def check_grounding_location(sub: PropertyGraph, params: Mapping | None = None) -> CheckOutcome:
    fid = "check_grounding_location"
    grounds = sub.of_kind(NodeKind.GROUND)
    if not grounds:
        raise EmptyRegion(fid, "no ground node in region")
    violations = []
    for gnd in grounds:
        ok = False
        for nb in sub.neighbors(gnd.id):
            hops = [nb]
            if sub.node(nb).kind == NodeKind.JUNCTION:
                hops += [x for x in sub.neighbors(nb) if x != gnd.id]
            if any(sub.node(h).get("ground_ok", "").lower() == "true" for h in hops):
                ok = True
                break
        if not ok:
            near = sorted({sub.node(nb).kind.value for nb in sub.neighbors(gnd.id)}) or ["nothing"]
            violations.append(
                Evidence(gnd.id, f"ground attached to {', '.join(near)}, not a designated grounding terminal")
            )
    return _outcome(fid, violations)


# ---------------------------------------------------------------------------
# terminal labelling
# ---------------------------------------------------------------------------


def _terminals(sub: PropertyGraph, fid: str):
    terms = sub.of_kind(NodeKind.TERMINAL)
    if not terms:
        raise EmptyRegion(fid, "no terminal in region")
    return terms


def check_terminal_ids_missing(sub: PropertyGraph, params: Mapping | None = None) -> CheckOutcome:
    fid = "check_terminal_ids_missing"
    violations = [
        Evidence(t.id, "terminal has no terminal_id")
        for t in _terminals(sub, fid)
        if not (t.get("terminal_id") or "").strip()
    ]
    return _outcome(fid, violations)


def check_terminal_ids_duplicate(sub: PropertyGraph, params: Mapping | None = None) -> CheckOutcome:
    fid = "check_terminal_ids_duplicate"
    groups: dict[str, list[int]] = defaultdict(list)
    for t in _terminals(sub, fid):
        tid = (t.get("terminal_id") or "").strip()
        if tid:
            groups[tid].append(t.id)
    violations = [
        Evidence(tuple(ids), f"terminal_id {tid} shared by {len(ids)} terminals")
        for tid, ids in sorted(groups.items())
        if len(ids) > 1
    ]
    return _outcome(fid, violations)


def natural_key(label: str):
    return tuple((0, int(tok), "") if tok.isdigit() else (1, 0, tok.lower()) for tok in re.findall(r"\d+|\D+", label))


def strip_order(sub: PropertyGraph) -> list[int]:
    """Labelled terminals ordered along the strip's principal axis."""
    labelled = [t for t in sub.of_kind(NodeKind.TERMINAL) if (t.get("terminal_id") or "").strip()]
    if len(labelled) < 2:
        return [t.id for t in labelled]
    pts = np.array([t.anchor for t in labelled], dtype=float)
    centred = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centred, full_matrices=False)
    proj = centred @ vt[0]
    order = sorted(range(len(labelled)), key=lambda i: (proj[i], labelled[i].id))
    return [labelled[i].id for i in order]


def _inversions(keys: list) -> list[tuple[int, int]]:
    return [(i, j) for i in range(len(keys)) for j in range(i + 1, len(keys)) if keys[i] > keys[j]]


def check_terminal_alignment(sub: PropertyGraph, params: Mapping | None = None) -> CheckOutcome:
    """Terminal ids must run monotonically along the strip (either direction)."""
    fid = "check_terminal_alignment"
    _terminals(sub, fid)
    order = strip_order(sub)
    keys = [natural_key(sub.node(i).get("terminal_id")) for i in order]
    ascending = _inversions(keys)
    descending = _inversions(keys[::-1])
    if len(descending) < len(ascending):
        ordered = order[::-1]
        inv = descending
    else:
        ordered = order
        inv = ascending
    violations = []
    for i, j in inv:
        a, b = ordered[i], ordered[j]
        violations.append(
            Evidence(
                (a, b),
                f"label {sub.node(a).get('terminal_id')} precedes {sub.node(b).get('terminal_id')} along the strip",
            )
        )
    return _outcome(fid, violations)


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------


def _circuit_labels(sub: PropertyGraph) -> set[str]:
    return {n.get("circuit") for n in sub.nodes if n.get("circuit")}


def check_open_circuit(sub: PropertyGraph, params: Mapping | None = None) -> CheckOutcome:
    """Fails when the region breaks into more fragments than expected.

    The expected count comes from ``params["expected_components"]``, else the
    number of distinct circuit labels in the region, else 1.
    """
    fid = "check_open_circuit"
    if not sub.nodes:
        raise EmptyRegion(fid, "empty region")
    params = params or {}
    expected = params.get("expected_components")
    if expected is None:
        expected = len(_circuit_labels(sub)) or 1
    part = components(sub, eps=_eps(params))
    if part.count <= int(expected):
        return _outcome(fid, [])
    violations = [
        Evidence(tuple(frag), f"fragment {k + 1} of {part.count} (expected {expected})")
        for k, frag in enumerate(part.members())
    ]
    return _outcome(fid, violations)


def check_polarity(sub: PropertyGraph, params: Mapping | None = None) -> CheckOutcome:
    """Product over polarity-labelled edges of [polarity(u) == polarity(v)]."""
    fid = "check_polarity"
    labelled = []
    for a, b in sub.simple_edges():
        pa, pb = sub.node(a).get("polarity"), sub.node(b).get("polarity")
        if pa and pb:
            labelled.append((a, b, pa, pb))
    if not labelled:
        raise EmptyRegion(fid, "no edge with polarity on both ends")
    violations = [Evidence((a, b), f"polarity {pa} wired to {pb}") for a, b, pa, pb in labelled if pa != pb]
    return _outcome(fid, violations)


def check_short_circuit(sub: PropertyGraph, params: Mapping | None = None) -> CheckOutcome:
    fid = "check_short_circuit"
    if not _circuit_labels(sub):
        raise EmptyRegion(fid, "no circuit labels in region")
    violations = []
    for members in components(sub, eps=_eps(params)).members():
        labelled = [(i, sub.node(i).get("circuit")) for i in members if sub.node(i).get("circuit")]
        if len({c for _, c in labelled}) < 2:
            continue
        best = None
        for i, ci in labelled:
            dist = bfs_distances(sub, i)
            for j, cj in labelled:
                if cj != ci and i < j:
                    cand = (dist[j], i, j)
                    best = cand if best is None or cand < best else best
        _, i, j = best
        path = shortest_path(sub, i, j)
        labels = sorted({c for _, c in labelled})
        violations.append(
            Evidence(
                (i, j),
                f"circuits {', '.join(labels)} joined; path {'-'.join(map(str, path))}",
            )
        )
    return _outcome(fid, violations)


def check_missing_phase(sub: PropertyGraph, params: Mapping | None = None) -> CheckOutcome:
    fid = "check_missing_phase"
    if not sub.nodes:
        raise EmptyRegion(fid, "empty region")
    required = tuple((params or {}).get("phases", ("A", "B", "C")))
    present = {n.get("phase") for n in sub.nodes if n.get("phase")}
    violations = [Evidence(None, f"phase {ph} absent") for ph in required if ph not in present]
    return _outcome(fid, violations)


def check_loop_anomaly(sub: PropertyGraph, params: Mapping | None = None) -> CheckOutcome:
    fid = "check_loop_anomaly"
    if not sub.nodes:
        raise EmptyRegion(fid, "empty region")
    expected = int((params or {}).get("expected_beta", 0))
    beta = cycle_number(sub)
    if beta == expected:
        return _outcome(fid, [])
    violations = [Evidence(None, f"cycle number {beta}, expected {expected}")]
    for cyc in fundamental_cycles(sub)[: max(beta - expected, 0)]:
        violations.append(Evidence(tuple(cyc), "loop " + "-".join(map(str, cyc))))
    return _outcome(fid, violations)


CheckFn = Callable[..., CheckOutcome]

FUNCTIONS: dict[str, CheckFn] = {
    "check_grounding_uniqueness": check_grounding_uniqueness,
    "check_grounding_location": check_grounding_location,
    "check_terminal_ids_missing": check_terminal_ids_missing,
    "check_terminal_ids_duplicate": check_terminal_ids_duplicate,
    "check_terminal_alignment": check_terminal_alignment,
    "check_open_circuit": check_open_circuit,
    "check_polarity": check_polarity,
    "check_short_circuit": check_short_circuit,
    "check_missing_phase": check_missing_phase,
    "check_loop_anomaly": check_loop_anomaly,
}

"""Vector-to-graph transformation: primitives -> property graph.

Nodes come from block references matched against a pattern library, from a
geometric ground-symbol pattern, and from small loose circles (terminals).
Edges come from wire geometry: endpoints closer than ``tau`` are merged into
connection points, T-meets split the passing wire, three or more wire ends
at a point away from any device make a junction, and interior crossings are
never connections.  Text annotations then become node attributes.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from fnmatch import fnmatchcase
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .dxf import Circle, Document, InsertRef, Line, Polyline, Text, resolve_inserts
from .errors import ConflictingAttribute, DegenerateWire
from .graph import ComponentNode, EdgeKind, NodeKind, PropertyGraph, WireEdge
from .spectral import UnionFind

log = logging.getLogger(__name__)

Point = tuple[float, float]

DEFAULT_BLOCK_PATTERNS: dict[NodeKind, tuple[str, ...]] = {
    NodeKind.CURRENT_TRANSFORMER: ("CT", "CT_*", "CT-*"),
    NodeKind.BREAKER: ("CB", "CB_*", "CB-*", "QF*", "BRK*"),
    NodeKind.GROUND: ("GND", "GND_*", "GND-*", "EARTH*"),
    NodeKind.TERMINAL: ("TB", "TERM*", "XT*"),
    NodeKind.GENERIC: ("DEV*", "RELAY*", "METER*"),
}

# INSERT attribute tags that alias the documented attribute keys
TAG_ALIASES = {
    "ID": "terminal_id",
    "TERMINAL_ID": "terminal_id",
    "POL": "polarity",
    "POLARITY": "polarity",
    "PH": "phase",
    "PHASE": "phase",
    "CKT": "circuit",
    "CIRCUIT": "circuit",
    "GND": "ground_type",
    "GROUND_TYPE": "ground_type",
    "GROUND_OK": "ground_ok",
}

PARALLEL_TOL = 1e-3  # |sin| between unit directions


@dataclass(frozen=True)
class PatternLibrary:
    blocks: Mapping[NodeKind, tuple[str, ...]] = field(default_factory=lambda: dict(DEFAULT_BLOCK_PATTERNS))
    geometric_ground: bool = True

    def kind_for_block(self, name: str) -> NodeKind | None:
        upper = name.upper()
        for kind, patterns in self.blocks.items():
            if any(fnmatchcase(upper, p.upper()) for p in patterns):
                return kind
        return None


@dataclass(frozen=True)
class BuilderConfig:
    tau: float = 0.5
    text_radius: float = 5.0
    pattern_library: PatternLibrary = field(default_factory=PatternLibrary)
    wire_layers: tuple[str, ...] | None = None  # None: every layer
    terminal_radius_factor: float = 4.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.text_radius > 0:
            raise ValueError("text_radius must be positive")


# ---------------------------------------------------------------------------
# node extraction
# ---------------------------------------------------------------------------


def _sort_key(n: ComponentNode):
    return (n.kind.order, n.anchor[1], n.anchor[0])


def _renumber(nodes: Sequence[ComponentNode]) -> tuple[list[ComponentNode], dict[int, int]]:
    ordered = sorted(nodes, key=_sort_key)
    mapping = {n.id: i for i, n in enumerate(ordered)}
    return [replace(n, id=mapping[n.id]) for n in ordered], mapping


def normalise_attributes(raw: Mapping[str, str], kind: NodeKind) -> dict[str, str]:
    out = {}
    for tag, value in raw.items():
        key = TAG_ALIASES.get(tag.upper(), tag.lower())
        if key == "polarity":
            value = _polarity(value)
            if value is None:
                continue
        if key == "polarity" and kind == NodeKind.GROUND:
            continue
        out[key] = value
    return out


def _polarity(text: str) -> str | None:
    t = text.strip()
    if t == "+":
        return "+"
    if t in ("-", "−"):
        return "-"
    return None


def _loose_lines(primitives) -> list[Line]:
    return [p for p in primitives if isinstance(p, Line) and p.source is None]


def find_ground_patterns(primitives, cfg: BuilderConfig) -> list[tuple[Point, tuple[str, ...]]]:
    """Three stacked parallel strokes of strictly decreasing length.

    Returns (anchor, consumed line handles) per match; the anchor is the
    midpoint of the longest stroke.  Orientation is free so the pattern
    survives rotation of the drawing.
    """
    if not cfg.pattern_library.geometric_ground:
        return []
    tau = cfg.tau
    lines = _loose_lines(primitives)
    info = []
    for ln in lines:
        d = np.subtract(ln.p2, ln.p1)
        length = float(np.hypot(*d))
        info.append((ln, length, d / length, (np.add(ln.p1, ln.p2)) / 2.0))
    info.sort(key=lambda t: (-t[1], t[0].handle))
    used: set[str] = set()
    found = []

    def stacked(upper, axis, normal, sign=None):
        """Shorter parallel strokes offset from `upper` along `normal`."""
        _, length, _, mid = upper
        out = []
        for cand in info:
            ln, clen, cu, cmid = cand
            if cand is upper or ln.handle in used or clen >= length - 1e-12:
                continue
            if abs(axis[0] * cu[1] - axis[1] * cu[0]) > PARALLEL_TOL:
                continue
            off = cmid - mid
            perp = float(off @ normal)
            if abs(perp) <= 1e-12 or abs(perp) > 2 * tau or abs(float(off @ axis)) > tau:
                continue
            side = 1 if perp > 0 else -1
            if sign is None or side == sign:
                out.append((side, cand))
        return out

    for top in info:
        if top[0].handle in used:
            continue
        axis = top[2]
        normal = np.array([-axis[1], axis[0]])
        match = None
        for side, middle in stacked(top, axis, normal):
            lows = [c for _, c in stacked(middle, axis, normal, side) if c is not top]
            if lows:
                match = (middle, lows[0])
                break
        if match:
            handles = (top[0].handle, match[0][0].handle, match[1][0].handle)
            used.update(handles)
            found.append(((float(top[3][0]), float(top[3][1])), handles))
    return found


def extract_nodes(primitives, cfg: BuilderConfig) -> list[ComponentNode]:
    nodes: list[ComponentNode] = []
    seen_inserts: dict[str, InsertRef] = {}
    for p in primitives:
        if p.source is not None and p.source.handle not in seen_inserts:
            seen_inserts[p.source.handle] = p.source
    for ref in seen_inserts.values():
        kind = cfg.pattern_library.kind_for_block(ref.block_name)
        if kind is None:
            continue
        nodes.append(ComponentNode(len(nodes), kind, ref.position, normalise_attributes(ref.attributes, kind)))

    insert_anchors = [n.anchor for n in nodes]
    for anchor, _ in find_ground_patterns(primitives, cfg):
        # an INSERT-derived node at the same spot takes precedence
        if any(math.dist(anchor, a) <= cfg.tau for a in insert_anchors):
            continue
        nodes.append(ComponentNode(len(nodes), NodeKind.GROUND, anchor, {}))

    limit = cfg.terminal_radius_factor * cfg.tau
    for p in primitives:
        if isinstance(p, Circle) and p.source is None and p.radius <= limit:
            nodes.append(ComponentNode(len(nodes), NodeKind.TERMINAL, p.center, {}))

    return _renumber(nodes)[0]


# ---------------------------------------------------------------------------
# edge inference
# ---------------------------------------------------------------------------


def wire_segments(primitives, cfg: BuilderConfig) -> list[tuple[Point, Point, str]]:
    symbol_handles = {h for _, hs in find_ground_patterns(primitives, cfg) for h in hs}
    layers = set(cfg.wire_layers) if cfg.wire_layers is not None else None
    out = []
    for p in primitives:
        if p.source is not None or (layers is not None and p.layer not in layers):
            continue
        if isinstance(p, Line) and p.handle not in symbol_handles:
            out.append((p.p1, p.p2, p.handle))
        elif isinstance(p, Polyline):
            for k, (a, b) in enumerate(p.segments()):
                out.append((a, b, f"{p.handle}#{k}"))
    return out


def _split_at_tees(segs: list[tuple[Point, Point, str]], tau: float) -> list[tuple[Point, Point, str]]:
    """Split segments wherever another segment's endpoint touches their interior."""
    if not segs:
        return []
    a = np.array([s[0] for s in segs], dtype=float)
    b = np.array([s[1] for s in segs], dtype=float)
    ends = np.concatenate([a, b])  # endpoint k belongs to segment k % m
    m = len(segs)
    owner = np.concatenate([np.arange(m), np.arange(m)])
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    # t[k, s]: projection parameter of endpoint k on segment s
    rel = ends[:, None, :] - a[None, :, :]
    t = np.einsum("ksj,sj->ks", rel, d) / dd[None, :]
    proj = a[None, :, :] + t[..., None] * d[None, :, :]
    dist = np.linalg.norm(ends[:, None, :] - proj, axis=2)
    to_a = np.linalg.norm(ends[:, None, :] - a[None, :, :], axis=2)
    to_b = np.linalg.norm(ends[:, None, :] - b[None, :, :], axis=2)
    hit = (dist <= tau) & (t > 0) & (t < 1) & (to_a > tau) & (to_b > tau)
    hit[np.arange(2 * m), owner] = False
    splits: dict[int, list[float]] = defaultdict(list)
    for k, s in zip(*np.nonzero(hit)):
        splits[int(s)].append(float(t[k, s]))
    out = []
    for s, (p, q, h) in enumerate(segs):
        ts = sorted(set(splits.get(s, [])))
        if not ts:
            out.append((p, q, h))
            continue
        pts = [p] + [(p[0] + u * (q[0] - p[0]), p[1] + u * (q[1] - p[1])) for u in ts] + [q]
        for k, (u, v) in enumerate(zip(pts, pts[1:])):
            out.append((u, v, f"{h}@{k}"))
    return out


def infer_edges(
    primitives, nodes: Sequence[ComponentNode], cfg: BuilderConfig
) -> tuple[list[ComponentNode], list[WireEdge]]:
    tau = cfg.tau
    segs = _split_at_tees(wire_segments(primitives, cfg), tau)
    if not segs:
        renumbered, _ = _renumber(nodes)
        return renumbered, []

    points = np.array([pt for s in segs for pt in (s[0], s[1])], dtype=float)
    uf = UnionFind(len(points))
    for i, j in cKDTree(points).query_pairs(tau):
        uf.union(i, j)
    cluster_of = [uf.find(i) for i in range(len(points))]
    members: dict[int, list[int]] = defaultdict(list)
    for i, c in enumerate(cluster_of):
        members[c].append(i)

    # connection point -> device node (nearest anchor within tau)
    node_list = list(nodes)
    attached: dict[int, int] = {}
    if node_list:
        anchors = np.array([n.anchor for n in node_list], dtype=float)
        tree = cKDTree(anchors)
        for c, idx in members.items():
            # the bound is exclusive; nudge it so a gap of exactly tau still attaches
            dist, which = tree.query(points[idx], k=1, distance_upper_bound=np.nextafter(tau, np.inf))
            best = None
            for dv, wv in zip(np.atleast_1d(dist), np.atleast_1d(which)):
                if np.isfinite(dv) and dv <= tau:
                    cand = (float(dv), node_list[int(wv)].id)
                    best = cand if best is None or cand < best else best
            if best is not None:
                attached[c] = best[1]

    next_id = max((n.id for n in node_list), default=-1) + 1
    junctions = []
    for c in sorted(members, key=lambda c: min(members[c])):
        if c in attached or len(members[c]) < 3:
            continue
        centre = points[members[c]].mean(axis=0)
        junctions.append(ComponentNode(next_id, NodeKind.JUNCTION, (float(centre[0]), float(centre[1])), {}))
        attached[c] = next_id
        next_id += 1

    incident: dict[int, list[tuple[int, int]]] = defaultdict(list)  # cluster -> (segment, other cluster)
    for s, seg in enumerate(segs):
        ca, cb = cluster_of[2 * s], cluster_of[2 * s + 1]
        if ca == cb:
            raise DegenerateWire(seg[2].split("@")[0].split("#")[0])
        incident[ca].append((s, cb))
        incident[cb].append((s, ca))

    pairs = set()
    for start, node_id in attached.items():
        for seg, nxt in incident[start]:
            prev_seg, cur = seg, nxt
            for _ in range(len(segs) + 1):
                if cur in attached:
                    other = attached[cur]
                    if other != node_id:
                        pairs.add((min(node_id, other), max(node_id, other)))
                    break
                onward = [(s, o) for s, o in incident[cur] if s != prev_seg]
                if len(onward) != 1:
                    break  # dangling end
                prev_seg, cur = onward[0]

    all_nodes, mapping = _renumber(node_list + junctions)
    edges = sorted(
        (WireEdge(mapping[a], mapping[b], EdgeKind.CONDUCTOR) for a, b in pairs),
        key=lambda e: (e.a, e.b),
    )
    return all_nodes, edges


# ---------------------------------------------------------------------------
# attributes
# ---------------------------------------------------------------------------


def parse_annotation(content: str) -> tuple[str, str] | None:
    """Map annotation text to an attribute (key, value), or None."""
    text = content.strip()
    pol = _polarity(text)
    if pol is not None:
        return ("polarity", pol)
    upper = text.upper()
    if upper.startswith("ID:"):
        value = text[3:].strip()
        return ("terminal_id", value) if value else None
    if upper.startswith("PH:"):
        value = text[3:].strip().upper()
        return ("phase", value) if value in ("A", "B", "C") else None
    if upper.startswith("CKT:"):
        value = text[4:].strip()
        return ("circuit", value) if value else None
    if upper.startswith("GND:"):
        value = text[4:].strip()
        return ("ground_type", value) if value else None
    if "=" in text:
        key, _, value = text.partition("=")
        key = key.strip().lower()
        if key and value.strip() and key.replace("_", "").isalnum():
            return (key, value.strip())
    return None


def attach_attributes(
    texts, nodes: Sequence[ComponentNode], cfg: BuilderConfig
) -> tuple[list[ComponentNode], list[Text]]:
    """Assign each annotation to the nearest node within ``text_radius``.

    Returns the updated nodes and the orphaned texts (no node in range).
    """
    orphans: list[Text] = []
    if not nodes:
        return list(nodes), [t for t in texts if isinstance(t, Text)]
    anchors = np.array([n.anchor for n in nodes], dtype=float)
    values: dict[int, dict[str, set[str]]] = {n.id: defaultdict(set) for n in nodes}
    for n in nodes:
        for k, v in n.attributes.items():
            values[n.id][k].add(v)
    for t in texts:
        if not isinstance(t, Text):
            continue
        parsed = parse_annotation(t.content)
        if parsed is None:
            continue
        dist = np.hypot(anchors[:, 0] - t.anchor[0], anchors[:, 1] - t.anchor[1])
        i = int(np.argmin(dist))
        if dist[i] > cfg.text_radius:
            orphans.append(t)
            continue
        node = nodes[i]
        key, value = parsed
        if key == "polarity" and node.kind == NodeKind.GROUND:
            log.debug("polarity text %s next to ground node %s ignored", t.handle, node.id)
            continue
        values[node.id][key].add(value)
    out = []
    for n in nodes:
        attrs = {}
        for key, vals in values[n.id].items():
            if len(vals) > 1:
                raise ConflictingAttribute(n.id, key, vals)
            attrs[key] = next(iter(vals))
        out.append(replace(n, attributes=dict(sorted(attrs.items()))))
    return out, orphans


def build_graph(doc: Document, cfg: BuilderConfig | None = None) -> PropertyGraph:
    cfg = cfg or BuilderConfig()
    primitives = resolve_inserts(doc)
    nodes = extract_nodes(primitives, cfg)
    nodes, edges = infer_edges(primitives, nodes, cfg)
    texts = [p for p in primitives if isinstance(p, Text) and p.source is None]
    nodes, orphans = attach_attributes(texts, nodes, cfg)
    if orphans:
        log.debug("%d orphan annotation(s): %s", len(orphans), [t.content for t in orphans])
    return PropertyGraph(tuple(nodes), tuple(edges))

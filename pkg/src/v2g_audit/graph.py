"""Property graph G = (V, E, X) and its canonical JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Callable, Iterable, Mapping

Point = tuple[float, float]


class NodeKind(str, Enum):
    CURRENT_TRANSFORMER = "CurrentTransformer"
    BREAKER = "Breaker"
    GROUND = "Ground"
    TERMINAL = "Terminal"
    JUNCTION = "Junction"
    GENERIC = "Generic"

    @property
    def order(self) -> int:
        return list(NodeKind).index(self)


class EdgeKind(str, Enum):
    CONDUCTOR = "Conductor"
    SYMBOL_INTERNAL = "SymbolInternal"


# attribute vocabulary read by the checks; other keys are carried but ignored
ATTRIBUTE_KEYS = ("terminal_id", "polarity", "phase", "ground_type", "ground_ok", "circuit")


@dataclass(frozen=True)
class ComponentNode:
    id: int
    kind: NodeKind
    anchor: Point
    attributes: Mapping[str, str] = field(default_factory=dict)

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.attributes.get(key, default)


@dataclass(frozen=True)
class WireEdge:
    a: int
    b: int
    kind: EdgeKind = EdgeKind.CONDUCTOR

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"self-loop on node {self.a}")
        if self.a > self.b:
            # unordered pair, stored normalised
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.a, self.b)


@dataclass(frozen=True)
class PropertyGraph:
    nodes: tuple[ComponentNode, ...] = ()
    edges: tuple[WireEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")
        known = set(ids)
        seen = set()
        for e in self.edges:
            if e.a not in known or e.b not in known:
                raise ValueError(f"edge {e.endpoints} references a missing node")
            key = (e.a, e.b, e.kind)
            if key in seen:
                raise ValueError(f"parallel {e.kind.value} edge {e.endpoints}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.nodes)

    @cached_property
    def by_id(self) -> dict[int, ComponentNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            if e.b not in adj[e.a]:
                adj[e.a].append(e.b)
                adj[e.b].append(e.a)
        return adj

    def node(self, node_id: int) -> ComponentNode:
        return self.by_id[node_id]

    def neighbors(self, node_id: int) -> list[int]:
        return self.adjacency[node_id]

    def of_kind(self, kind: NodeKind) -> list[ComponentNode]:
        return [n for n in self.nodes if n.kind == kind]

    def simple_edges(self) -> list[tuple[int, int]]:
        """Distinct node pairs joined by at least one edge of any kind."""
        return sorted({e.endpoints for e in self.edges})

    # -- derived graphs ------------------------------------------------------

    def without_edges(self) -> "PropertyGraph":
        return PropertyGraph(self.nodes, ())

    def without_attributes(self) -> "PropertyGraph":
        return PropertyGraph(tuple(replace(n, attributes={}) for n in self.nodes), self.edges)

    def relabel(self, mapping: Mapping[int, int]) -> "PropertyGraph":
        nodes = tuple(replace(n, id=mapping[n.id]) for n in self.nodes)
        edges = tuple(WireEdge(mapping[e.a], mapping[e.b], e.kind) for e in self.edges)
        return PropertyGraph(nodes, edges)

    def filter_edges(self, keep: Callable[[WireEdge], bool]) -> "PropertyGraph":
        return PropertyGraph(self.nodes, tuple(e for e in self.edges if keep(e)))

    # -- serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "id": n.id,
                    "kind": n.kind.value,
                    "anchor": [float(n.anchor[0]), float(n.anchor[1])],
                    "attributes": dict(sorted(n.attributes.items())),
                }
                for n in self.nodes
            ],
            "edges": [{"a": e.a, "b": e.b, "kind": e.kind.value} for e in self.edges],
        }

    def to_json(self) -> bytes:
        return (json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n").encode("utf-8")

    @classmethod
    def from_dict(cls, data: Mapping) -> "PropertyGraph":
        nodes = [
            ComponentNode(
                int(n["id"]),
                NodeKind(n["kind"]),
                (float(n["anchor"][0]), float(n["anchor"][1])),
                dict(n.get("attributes", {})),
            )
            for n in data.get("nodes", [])
        ]
        edges = [WireEdge(int(e["a"]), int(e["b"]), EdgeKind(e.get("kind", "Conductor"))) for e in data.get("edges", [])]
        return cls(tuple(nodes), tuple(edges))

    @classmethod
    def from_json(cls, data: bytes | str) -> "PropertyGraph":
        return cls.from_dict(json.loads(data))


def make_graph(
    edges: Iterable[tuple[int, int]],
    n: int | None = None,
    kinds: Mapping[int, NodeKind] | None = None,
    attributes: Mapping[int, Mapping[str, str]] | None = None,
) -> PropertyGraph:
    """Small-graph constructor for tests and fixtures.

    Nodes are 0..n-1 (n inferred from the edges when omitted), anchored on a
    line so that every node has a distinct position.
    """
    edges = [tuple(e) for e in edges]
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    kinds = kinds or {}
    attributes = attributes or {}
    nodes = tuple(
        ComponentNode(i, kinds.get(i, NodeKind.GENERIC), (float(i), 0.0), dict(attributes.get(i, {})))
        for i in range(n)
    )
    unique = sorted({(min(a, b), max(a, b)) for a, b in edges if a != b})
    return PropertyGraph(nodes, tuple(WireEdge(a, b) for a, b in unique))

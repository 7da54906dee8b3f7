"""ASCII DXF subset: tokenizer, parser, block resolution and writer.

Supported entities are LINE, ARC, CIRCLE, TEXT, INSERT (with trailing ATTRIB
records) and LWPOLYLINE, inside the BLOCKS and ENTITIES sections.  A bare
entity stream without SECTION markers is read as model space.  Everything
else (HEADER, TABLES, OBJECTS, unknown entity types) is skipped and counted.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import (
    BinaryDXFError,
    MalformedEntity,
    NonIntegerCode,
    OddLineCount,
    UnresolvedBlock,
)

Point = tuple[float, float]

Z_TOLERANCE = 1e-9
BINARY_SENTINEL = b"AutoCAD Binary DXF"


@dataclass(frozen=True)
class GroupCodePair:
    code: int
    value: str


@dataclass(frozen=True)
class InsertRef:
    """Provenance of a primitive that came out of a block reference."""

    handle: str
    block_name: str
    position: Point
    rotation: float
    scale: float
    attributes: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Line:
    p1: Point
    p2: Point
    layer: str = "0"
    handle: str = ""
    source: InsertRef | None = None


@dataclass(frozen=True)
class Arc:
    center: Point
    radius: float
    start_angle: float
    end_angle: float
    layer: str = "0"
    handle: str = ""
    source: InsertRef | None = None


@dataclass(frozen=True)
class Circle:
    center: Point
    radius: float
    layer: str = "0"
    handle: str = ""
    source: InsertRef | None = None


@dataclass(frozen=True)
class Text:
    anchor: Point
    content: str
    height: float = 1.0
    rotation: float = 0.0
    layer: str = "0"
    handle: str = ""
    source: InsertRef | None = None


@dataclass(frozen=True)
class Insert:
    block_name: str
    position: Point
    rotation: float = 0.0
    scale: float = 1.0
    attributes: Mapping[str, str] = field(default_factory=dict)
    layer: str = "0"
    handle: str = ""
    source: InsertRef | None = None


@dataclass(frozen=True)
class Polyline:
    vertices: tuple[Point, ...]
    closed: bool = False
    layer: str = "0"
    handle: str = ""
    source: InsertRef | None = None

    def segments(self) -> Iterator[tuple[Point, Point]]:
        vs = self.vertices
        for a, b in zip(vs, vs[1:]):
            yield a, b
        if self.closed and len(vs) > 2:
            yield vs[-1], vs[0]


Primitive = Union[Line, Arc, Circle, Text, Insert, Polyline]


@dataclass(frozen=True)
class BlockDefinition:
    name: str
    base_point: Point = (0.0, 0.0)
    primitives: tuple = ()


@dataclass
class Document:
    blocks: dict[str, BlockDefinition] = field(default_factory=dict)
    entities: list = field(default_factory=list)
    diagnostics: Counter = field(default_factory=Counter, compare=False)


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------


def tokenize(data: bytes | str) -> list[GroupCodePair]:
    if isinstance(data, bytes):
        if data.startswith(BINARY_SENTINEL):
            raise BinaryDXFError()
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            text = data.decode("cp1252")
    else:
        text = data
    lines = text.splitlines()
    # a trailing blank line after the final value is not part of the stream
    while lines and lines[-1].strip() == "" and len(lines) % 2 == 1:
        lines.pop()
    if len(lines) % 2:
        raise OddLineCount(len(lines))
    pairs = []
    for i in range(0, len(lines), 2):
        raw = lines[i].strip()
        try:
            code = int(raw)
        except ValueError:
            raise NonIntegerCode(i + 1, raw) from None
        if code < 0:
            raise NonIntegerCode(i + 1, raw)
        pairs.append(GroupCodePair(code, lines[i + 1].strip()))
    return pairs


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

SUPPORTED = {"LINE", "ARC", "CIRCLE", "TEXT", "INSERT", "LWPOLYLINE"}
SKIPPED_SECTIONS = {"HEADER", "CLASSES", "TABLES", "OBJECTS", "THUMBNAILIMAGE"}


def _records(pairs: Sequence[GroupCodePair]) -> Iterator[list[GroupCodePair]]:
    current: list[GroupCodePair] = []
    for pair in pairs:
        if pair.code == 0 and current:
            yield current
            current = []
        current.append(pair)
    if current:
        yield current


class _Record:
    """Code lookup over one entity record."""

    def __init__(self, pairs: list[GroupCodePair], handle: str):
        self.kind = pairs[0].value.upper() if pairs[0].code == 0 else ""
        self.pairs = pairs[1:]
        self.handle = handle
        for p in self.pairs:
            if p.code == 5:
                self.handle = p.value
                break

    def str(self, code: int, default: str | None = None) -> str | None:
        for p in self.pairs:
            if p.code == code:
                return p.value
        return default

    def float(self, code: int, default: float | None = None) -> float:
        raw = self.str(code)
        if raw is None:
            if default is None:
                raise MalformedEntity(self.handle, f"{self.kind} missing group code {code}")
            return default
        try:
            value = float(raw)
        except ValueError:
            raise MalformedEntity(self.handle, f"code {code} value {raw!r} is not a number") from None
        if not math.isfinite(value):
            raise MalformedEntity(self.handle, f"code {code} value {raw!r} is not finite")
        return value

    def point(self, xcode: int) -> Point:
        z = self.float(xcode + 20, 0.0)
        if abs(z) > Z_TOLERANCE:
            raise MalformedEntity(self.handle, f"non-planar coordinate (code {xcode + 20} = {z})")
        return (self.float(xcode), self.float(xcode + 10))

    def floats(self, code: int) -> list[float]:
        out = []
        for p in self.pairs:
            if p.code == code:
                try:
                    out.append(float(p.value))
                except ValueError:
                    raise MalformedEntity(self.handle, f"code {code} value {p.value!r} is not a number") from None
        return out


def _parse_entity(rec: _Record) -> Primitive:
    layer = rec.str(8, "0")
    h = rec.handle
    kind = rec.kind
    if kind == "LINE":
        p1, p2 = rec.point(10), rec.point(11)
        if p1 == p2:
            raise MalformedEntity(h, "zero-length LINE")
        return Line(p1, p2, layer, h)
    if kind in ("ARC", "CIRCLE"):
        center = rec.point(10)
        radius = rec.float(40)
        if radius <= 0:
            raise MalformedEntity(h, f"non-positive radius {radius}")
        if kind == "CIRCLE":
            return Circle(center, radius, layer, h)
        return Arc(center, radius, rec.float(50), rec.float(51), layer, h)
    if kind == "TEXT":
        return Text(rec.point(10), rec.str(1, ""), rec.float(40, 1.0), rec.float(50, 0.0), layer, h)
    if kind == "INSERT":
        name = rec.str(2)
        if not name:
            raise MalformedEntity(h, "INSERT without block name")
        sx = rec.float(41, 1.0)
        sy = rec.float(42, sx)
        if sx <= 0 or not math.isclose(sx, sy, rel_tol=1e-12, abs_tol=0.0):
            raise MalformedEntity(h, f"only uniform positive scale is supported (got {sx}, {sy})")
        return Insert(name, rec.point(10), rec.float(50, 0.0), sx, {}, layer, h)
    if kind == "LWPOLYLINE":
        xs, ys = rec.floats(10), rec.floats(20)
        if len(xs) != len(ys):
            raise MalformedEntity(h, "LWPOLYLINE vertex codes unbalanced")
        if any(abs(z) > Z_TOLERANCE for z in rec.floats(30)):
            raise MalformedEntity(h, "non-planar LWPOLYLINE")
        vertices = tuple(zip(xs, ys))
        if len(vertices) < 2:
            raise MalformedEntity(h, "LWPOLYLINE needs at least two vertices")
        if any(a == b for a, b in zip(vertices, vertices[1:])):
            raise MalformedEntity(h, "LWPOLYLINE has repeated consecutive vertices")
        flags = int(rec.float(70, 0.0))
        return Polyline(vertices, bool(flags & 1), layer, h)
    raise AssertionError(kind)


def parse_document(pairs: Sequence[GroupCodePair]) -> Document:
    doc = Document()
    section: str | None = None
    block_name: str | None = None
    block_base: Point = (0.0, 0.0)
    block_items: list = []
    last_insert: list | None = None  # [container, index] of the most recent INSERT
    seen_handles: set[str] = set()
    auto = 0

    def add(container: list, prim) -> None:
        if prim.handle in seen_handles:
            raise MalformedEntity(prim.handle, "duplicate handle")
        seen_handles.add(prim.handle)
        container.append(prim)

    for raw in _records(pairs):
        auto += 1
        rec = _Record(raw, f"~{auto}")
        kind = rec.kind
        if kind == "EOF":
            break
        if kind == "SECTION":
            section = (rec.str(2, "") or "").upper()
            continue
        if kind == "ENDSEC":
            section = None
            continue
        if section in SKIPPED_SECTIONS or (section is not None and section not in ("BLOCKS", "ENTITIES")):
            continue
        if section == "BLOCKS" and kind == "BLOCK":
            block_name = rec.str(2, "")
            if not block_name:
                raise MalformedEntity(rec.handle, "BLOCK without name")
            block_base = rec.point(10) if rec.str(10) is not None else (0.0, 0.0)
            block_items = []
            continue
        if section == "BLOCKS" and kind == "ENDBLK":
            if block_name is None:
                raise MalformedEntity(rec.handle, "ENDBLK without BLOCK")
            doc.blocks[block_name] = BlockDefinition(block_name, block_base, tuple(block_items))
            block_name = None
            continue
        container = block_items if (section == "BLOCKS" and block_name is not None) else doc.entities
        if kind == "ATTRIB":
            if last_insert is None or last_insert[0] is not container:
                doc.diagnostics["orphan ATTRIB"] += 1
                continue
            tag, value = rec.str(2), rec.str(1, "")
            if not tag:
                raise MalformedEntity(rec.handle, "ATTRIB without tag")
            ins = container[last_insert[1]]
            attrs = dict(ins.attributes)
            attrs[tag] = value
            container[last_insert[1]] = replace(ins, attributes=attrs)
            continue
        if kind == "SEQEND":
            last_insert = None
            continue
        if kind not in SUPPORTED:
            doc.diagnostics[f"skipped {kind or '<no type>'}"] += 1
            continue
        prim = _parse_entity(rec)
        add(container, prim)
        last_insert = [container, len(container) - 1] if kind == "INSERT" else None

    if block_name is not None:
        raise MalformedEntity(block_name, "BLOCK not terminated by ENDBLK")
    _validate_inserts(doc)
    return doc


def _validate_inserts(doc: Document) -> None:
    def walk(prims: Iterable, chain: tuple[str, ...]) -> None:
        for p in prims:
            if not isinstance(p, Insert):
                continue
            if p.block_name not in doc.blocks:
                raise UnresolvedBlock(p.block_name)
            if p.block_name in chain:
                raise MalformedEntity(p.handle, f"recursive block reference {p.block_name!r}")
            walk(doc.blocks[p.block_name].primitives, chain + (p.block_name,))

    walk(doc.entities, ())
    for name, block in doc.blocks.items():
        walk(block.primitives, (name,))


def read_dxf(data: bytes | str) -> Document:
    return parse_document(tokenize(data))


# ---------------------------------------------------------------------------
# geometry of similarity transforms
# ---------------------------------------------------------------------------


def cos_sin(degrees: float) -> tuple[float, float]:
    """cos/sin that are exact on multiples of 90 degrees."""
    d = math.fmod(degrees, 360.0)
    if d < 0:
        d += 360.0
    exact = {0.0: (1.0, 0.0), 90.0: (0.0, 1.0), 180.0: (-1.0, 0.0), 270.0: (0.0, -1.0), 360.0: (1.0, 0.0)}
    if d in exact:
        return exact[d]
    r = math.radians(d)
    return math.cos(r), math.sin(r)


@dataclass(frozen=True)
class Similarity:
    """p -> R(rotation) * (scale * (p - pivot)) + offset."""

    scale: float = 1.0
    rotation: float = 0.0
    offset: Point = (0.0, 0.0)
    pivot: Point = (0.0, 0.0)

    def apply(self, p: Point) -> Point:
        c, s = cos_sin(self.rotation)
        x = (p[0] - self.pivot[0]) * self.scale
        y = (p[1] - self.pivot[1]) * self.scale
        return (c * x - s * y + self.offset[0], s * x + c * y + self.offset[1])


def _wrap_angle(a: float) -> float:
    a = math.fmod(a, 360.0)
    return a + 360.0 if a < 0 else a


def transform_primitive(p: Primitive, t: Similarity, source: InsertRef | None = None):
    """Apply a similarity transform; `source` overrides provenance when given."""
    src = source if source is not None else p.source
    if isinstance(p, Line):
        return replace(p, p1=t.apply(p.p1), p2=t.apply(p.p2), source=src)
    if isinstance(p, Circle):
        return replace(p, center=t.apply(p.center), radius=p.radius * t.scale, source=src)
    if isinstance(p, Arc):
        return replace(
            p,
            center=t.apply(p.center),
            radius=p.radius * t.scale,
            start_angle=_wrap_angle(p.start_angle + t.rotation),
            end_angle=_wrap_angle(p.end_angle + t.rotation),
            source=src,
        )
    if isinstance(p, Text):
        return replace(
            p,
            anchor=t.apply(p.anchor),
            height=p.height * t.scale,
            rotation=_wrap_angle(p.rotation + t.rotation),
            source=src,
        )
    if isinstance(p, Insert):
        return replace(
            p,
            position=t.apply(p.position),
            rotation=_wrap_angle(p.rotation + t.rotation),
            scale=p.scale * t.scale,
            source=src,
        )
    if isinstance(p, Polyline):
        return replace(p, vertices=tuple(t.apply(v) for v in p.vertices), source=src)
    raise TypeError(type(p).__name__)


def resolve_inserts(doc: Document) -> list:
    """Flatten block references into world-coordinate primitives.

    Each resolved primitive carries an InsertRef naming the top-level INSERT
    it came from, and a handle of the form ``<insert handle>/<block handle>``.
    """
    out: list = []

    def expand(ins: Insert, ref: InsertRef, prefix: str) -> None:
        block = doc.blocks[ins.block_name]
        local = Similarity(ins.scale, ins.rotation, ins.position, block.base_point)
        for child in block.primitives:
            handle = f"{prefix}/{child.handle}"
            if isinstance(child, Insert):
                # similarity transforms compose, so a nested INSERT is just re-placed
                expand(transform_primitive(child, local), ref, handle)
                continue
            out.append(replace(transform_primitive(child, local, ref), handle=handle))

    for ent in doc.entities:
        if isinstance(ent, Insert):
            ref = InsertRef(ent.handle, ent.block_name, ent.position, ent.rotation, ent.scale, dict(ent.attributes))
            expand(ent, ref, ent.handle)
        else:
            out.append(ent)
    return out


def transform_document(doc: Document, t: Similarity, point_fn=None) -> Document:
    """Transform model space; block definitions stay in block-local coordinates.

    `point_fn`, when given, post-processes wire vertices (used for jitter).
    """
    ents = [transform_primitive(e, t) for e in doc.entities]
    if point_fn is not None:
        ents = [point_fn(e) for e in ents]
    return Document(dict(doc.blocks), ents, Counter(doc.diagnostics))


# ---------------------------------------------------------------------------
# writer
# ---------------------------------------------------------------------------


def _num(x: float) -> str:
    return repr(float(x))


def _entity_pairs(p: Primitive) -> list[tuple[int, str]]:
    if isinstance(p, Line):
        return [(0, "LINE"), (5, p.handle), (8, p.layer),
                (10, _num(p.p1[0])), (20, _num(p.p1[1])), (30, "0.0"),
                (11, _num(p.p2[0])), (21, _num(p.p2[1])), (31, "0.0")]
    if isinstance(p, Circle):
        return [(0, "CIRCLE"), (5, p.handle), (8, p.layer),
                (10, _num(p.center[0])), (20, _num(p.center[1])), (30, "0.0"),
                (40, _num(p.radius))]
    if isinstance(p, Arc):
        return [(0, "ARC"), (5, p.handle), (8, p.layer),
                (10, _num(p.center[0])), (20, _num(p.center[1])), (30, "0.0"),
                (40, _num(p.radius)), (50, _num(p.start_angle)), (51, _num(p.end_angle))]
    if isinstance(p, Text):
        return [(0, "TEXT"), (5, p.handle), (8, p.layer),
                (10, _num(p.anchor[0])), (20, _num(p.anchor[1])), (30, "0.0"),
                (40, _num(p.height)), (50, _num(p.rotation)), (1, p.content)]
    if isinstance(p, Insert):
        out = [(0, "INSERT"), (5, p.handle), (8, p.layer)]
        if p.attributes:
            out.append((66, "1"))
        out += [(2, p.block_name),
                (10, _num(p.position[0])), (20, _num(p.position[1])), (30, "0.0"),
                (41, _num(p.scale)), (42, _num(p.scale)), (50, _num(p.rotation))]
        if p.attributes:
            for i, (tag, value) in enumerate(sorted(p.attributes.items())):
                out += [(0, "ATTRIB"), (5, f"{p.handle}.{i}"), (8, p.layer),
                        (10, _num(p.position[0])), (20, _num(p.position[1])), (30, "0.0"),
                        (40, "1.0"), (1, value), (2, tag)]
            out += [(0, "SEQEND"), (5, f"{p.handle}.end"), (8, p.layer)]
        return out
    if isinstance(p, Polyline):
        out = [(0, "LWPOLYLINE"), (5, p.handle), (8, p.layer),
               (90, str(len(p.vertices))), (70, "1" if p.closed else "0")]
        for x, y in p.vertices:
            out += [(10, _num(x)), (20, _num(y))]
        return out
    raise TypeError(type(p).__name__)


def write_document(doc: Document) -> bytes:
    pairs: list[tuple[int, str]] = [
        (0, "SECTION"), (2, "HEADER"), (9, "$ACADVER"), (1, "AC1015"), (0, "ENDSEC"),
        (0, "SECTION"), (2, "BLOCKS"),
    ]
    for name in sorted(doc.blocks):
        block = doc.blocks[name]
        pairs += [(0, "BLOCK"), (8, "0"), (2, name), (70, "0"),
                  (10, _num(block.base_point[0])), (20, _num(block.base_point[1])), (30, "0.0")]
        for p in block.primitives:
            pairs += _entity_pairs(p)
        pairs.append((0, "ENDBLK"))
    pairs += [(0, "ENDSEC"), (0, "SECTION"), (2, "ENTITIES")]
    for p in doc.entities:
        pairs += _entity_pairs(p)
    pairs += [(0, "ENDSEC"), (0, "EOF")]
    return "".join(f"{code}\n{value}\n" for code, value in pairs).encode("utf-8")


# ---------------------------------------------------------------------------
# comparison helper used by round-trip checks
# ---------------------------------------------------------------------------


def _points(p) -> list[Point]:
    if isinstance(p, Line):
        return [p.p1, p.p2]
    if isinstance(p, (Circle, Arc)):
        return [p.center]
    if isinstance(p, Text):
        return [p.anchor]
    if isinstance(p, Insert):
        return [p.position]
    if isinstance(p, Polyline):
        return list(p.vertices)
    return []


def _scalars(p) -> list[float]:
    if isinstance(p, Circle):
        return [p.radius]
    if isinstance(p, Arc):
        return [p.radius, p.start_angle, p.end_angle]
    if isinstance(p, Text):
        return [p.height]
    if isinstance(p, Insert):
        return [p.scale, p.rotation]
    return []


def max_deviation(a: Sequence, b: Sequence) -> float:
    """Largest coordinate difference between two primitive lists.

    Returns inf when the lists differ structurally (length, kind, layer,
    handle, text content or attributes).
    """
    if len(a) != len(b):
        return math.inf
    worst = 0.0
    for x, y in zip(a, b):
        if type(x) is not type(y) or x.layer != y.layer or x.handle != y.handle:
            return math.inf
        if isinstance(x, Text) and x.content != y.content:
            return math.inf
        if isinstance(x, Insert) and (x.block_name != y.block_name or dict(x.attributes) != dict(y.attributes)):
            return math.inf
        if isinstance(x, Polyline) and x.closed != y.closed:
            return math.inf
        px, py = _points(x), _points(y)
        if len(px) != len(py):
            return math.inf
        for u, v in zip(px, py):
            worst = max(worst, abs(u[0] - v[0]), abs(u[1] - v[1]))
        for u, v in zip(_scalars(x), _scalars(y)):
            worst = max(worst, abs(u - v))
    return worst

"""Synthetic secondary-circuit schematics with one injected violation.

Every base case draws the same template: three phase CTs star-connected to a
neutral terminal that is grounded once, a breaker on phase A, a six-way
terminal strip and an auxiliary circuit (breaker + two terminals).  Layout
constants keep every wire gap at 0 or >= 5 drawing units and every label
within 3.5 units of its device, so verdicts are stable for the default
tolerances under rotation, translation, scale in [0.9, 1.1] and endpoint
jitter below tau / 2.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..dxf import (
    BlockDefinition,
    Circle,
    Document,
    Insert,
    Line,
    Polyline,
    Text,
    write_document,
)
from ..errors import UnknownKind
from ..report import FAIL, INDETERMINATE, PASS

Point = tuple[float, float]

KINDS = ("MA", "DI", "MI", "IL", "MP", "MG", "OC", "PR", "XS", "MPH")
CATEGORY_OF = {
    "MA": "Conn.", "DI": "Conn.", "MI": "Conn.",
    "IL": "Ground.", "MP": "Ground.", "MG": "Ground.",
    "OC": "Wiring", "PR": "Wiring", "XS": "Wiring", "MPH": "Wiring",
}
BENCH_CATEGORIES = ("Conn.", "Ground.", "Wiring")

WIRE_LAYER = "WIRES"
TERMINAL_RADIUS = 0.5

# rule statuses that differ from "pass" when a kind's violation is injected
_KNOCK_ON = {
    "MP": {"MP": FAIL, "MG": FAIL, "IL": FAIL},
    "MG": {"MP": FAIL, "MG": FAIL, "IL": INDETERMINATE},
    # the cut leaves a CT fragment without its ground
    "OC": {"OC": FAIL, "MP": FAIL, "MG": FAIL},
}


def expected_statuses(kind: str, compliant: bool) -> dict[str, str]:
    """Ground-truth status of every benchmark rule for a generated case."""
    truth = {k: PASS for k in KINDS}
    if not compliant:
        truth.update(_KNOCK_ON.get(kind, {kind: FAIL}))
    return truth


@dataclass(frozen=True)
class Injection:
    """What the failing rule's evidence must name: node anchors and message fragments."""

    anchors: tuple[Point, ...] = ()
    messages: tuple[str, ...] = ()
    detail: str = ""


@dataclass
class BaseCase:
    case_id: str
    check_kind: str
    compliant: bool
    seed: int
    dxf: bytes
    ground_truth: dict[str, str]
    injection: Injection = field(default_factory=Injection)
    document: Document | None = field(default=None, repr=False, compare=False)

    @property
    def category(self) -> str:
        return CATEGORY_OF[self.check_kind]


def case_id(kind: str, compliant: bool, seed: int) -> str:
    return f"{kind}-{'ok' if compliant else 'bad'}-{seed:04d}"


def symbol_blocks() -> dict[str, BlockDefinition]:
    ct = BlockDefinition("CT", (0.0, 0.0), (
        Circle((0.0, 0.0), 1.5, "SYMBOLS", "B1"),
        Line((-2.0, 0.0), (2.0, 0.0), "SYMBOLS", "B2"),
    ))
    cb = BlockDefinition("CB", (0.0, 0.0), (
        Line((0.0, -1.5), (0.0, -0.5), "SYMBOLS", "B3"),
        Line((0.0, -0.5), (1.0, 0.8), "SYMBOLS", "B4"),
        Line((0.0, 0.8), (0.0, 1.5), "SYMBOLS", "B5"),
    ))
    gnd = BlockDefinition("GND", (0.0, 0.0), _ground_strokes((0.0, 0.0), (1.0, 0.0), "B6"))
    return {"CB": cb, "CT": ct, "GND": gnd}


def _ground_strokes(top: Point, axis: Point, prefix: str, layer: str = "SYMBOLS") -> tuple[Line, ...]:
    """Strokes of length 3, 2, 1 stacked 0.5 apart along the right-hand normal of `axis`."""
    ux, uy = axis
    nx, ny = uy, -ux
    out = []
    for k, half in enumerate((1.5, 1.0, 0.5)):
        cx, cy = top[0] + nx * 0.5 * k, top[1] + ny * 0.5 * k
        out.append(Line((cx - ux * half, cy - uy * half), (cx + ux * half, cy + uy * half), layer, f"{prefix}.{k}"))
    return tuple(out)


class _Sheet:
    def __init__(self, origin: Point):
        self.origin = origin
        self.entities: list = []
        self._n = 0x100

    def _h(self) -> str:
        self._n += 1
        return f"{self._n:X}"

    def at(self, x: float, y: float) -> Point:
        return (float(self.origin[0] + x), float(self.origin[1] + y))

    def line(self, a: Point, b: Point, layer: str = WIRE_LAYER) -> None:
        self.entities.append(Line(self.at(*a), self.at(*b), layer, self._h()))

    def poly(self, pts, layer: str = WIRE_LAYER) -> None:
        self.entities.append(Polyline(tuple(self.at(*p) for p in pts), False, layer, self._h()))

    def text(self, p: Point, content: str) -> None:
        self.entities.append(Text(self.at(*p), content, 1.0, 0.0, "TEXT", self._h()))

    def insert(self, block: str, p: Point, **attrs: str) -> None:
        self.entities.append(Insert(block, self.at(*p), 0.0, 1.0, dict(attrs), "DEVICES", self._h()))

    def terminal(self, p: Point) -> None:
        self.entities.append(Circle(self.at(*p), TERMINAL_RADIUS, "SYMBOLS", self._h()))

    def ground(self, p: Point, style: str, wire_dir: Point) -> None:
        """Ground symbol connected at `p`; `wire_dir` points from the device towards it."""
        dx, dy = wire_dir
        if style == "block":
            # the GND block stacks its strokes along -y
            rot = {(0.0, -1.0): 0.0, (-1.0, 0.0): 270.0}[(dx, dy)]
            self.entities.append(Insert("GND", self.at(*p), rot, 1.0, {}, "DEVICES", self._h()))
        else:
            self.entities.extend(_ground_strokes(self.at(*p), (-dy, dx), self._h()))


def generate_case(kind: str, compliant: bool, seed: int) -> BaseCase:
    if kind not in KINDS:
        raise UnknownKind(kind)
    rng = random.Random(f"{kind}|{int(compliant)}|{seed}")
    p = float(rng.choice((10, 12, 14)))
    origin = (float(rng.randint(-200, 200)), float(rng.randint(-200, 200)))
    prefix = rng.choice("XTK")
    start = rng.randint(1, 5)
    style = rng.choice(("block", "pattern"))
    aux_phase = rng.choice("ABC")
    sheet = _Sheet(origin)
    violate = not compliant

    xs = [i * p for i in range(6)]  # TA TB TC TN T5 T6
    term_pos = [(x, 0.0) for x in xs]
    ct_pos = [(k * p, 30.0) for k in range(3)]
    cb_pos = (0.0, 15.0)
    cb2_pos = (4.5 * p, 20.0)
    phases = ("A", "B", "C")
    ids = [f"{prefix}{start + i}" for i in range(6)]
    id_pos = [(x - 1.0, -3.0) for x in xs]
    ct_pol = ["+", "+", "+"]
    term_pol = ["+", "+", "+"]
    ct_phase = list(phases)
    injection = Injection()

    wires = {
        "ctA-cb": ("line", ct_pos[0], cb_pos),
        "cb-TA": ("line", cb_pos, term_pos[0]),
        "ctB-TB": ("line", ct_pos[1], term_pos[1]),
        "ctC-TC": ("line", ct_pos[2], term_pos[2]),
        "riserA": ("line", ct_pos[0], (0.0, 40.0)),
        "riserB": ("line", ct_pos[1], (p, 40.0)),
        "riserC": ("line", ct_pos[2], (2 * p, 40.0)),
        "bus1": ("line", (0.0, 40.0), (p, 40.0)),
        "bus2": ("line", (p, 40.0), (2 * p, 40.0)),
        "bus3": ("line", (2 * p, 40.0), (3 * p, 40.0)),
        "neutral": ("line", (3 * p, 40.0), term_pos[3]),
        "aux1": ("poly", [term_pos[4], (4 * p, 20.0), cb2_pos]),
        "aux2": ("poly", [cb2_pos, (5 * p, 20.0), term_pos[5]]),
    }
    # grounds: (connection point, wire start, wire direction into the symbol)
    grounds = [((3 * p, -10.0), term_pos[3], (0.0, -1.0))]
    ground_abs = lambda g: sheet.at(*g[0])  # noqa: E731

    if violate and kind == "MP":
        where = rng.choice(("TA", "TB", "TC", "CB"))
        if where == "CB":
            extra = ((-10.0, 15.0), cb_pos, (-1.0, 0.0))
        else:
            j = "ABC".index(where[1])
            extra = ((xs[j], -10.0), term_pos[j], (0.0, -1.0))
        grounds.append(extra)
        injection = Injection(tuple(ground_abs(g) for g in grounds), ("g=2",), f"second ground at {where}")
    elif violate and kind == "MG":
        grounds = []
        injection = Injection(tuple(sheet.at(*c) for c in ct_pos), ("g=0",), "ground removed")
    elif violate and kind == "IL":
        where = rng.choice(("CB", "CT_A"))
        if where == "CB":
            grounds = [((-10.0, 15.0), cb_pos, (-1.0, 0.0))]
        else:
            grounds = [((-10.0, 30.0), ct_pos[0], (-1.0, 0.0))]
        injection = Injection((ground_abs(grounds[0]),), (), f"ground moved to {where}")
    elif violate and kind == "OC":
        cut = rng.choice(("riserA", "riserB", "riserC", "bus1", "bus2"))
        del wires[cut]
        # CTs cut off from the grounded neutral
        isolated = {"riserA": (0,), "riserB": (1,), "riserC": (2,), "bus1": (0,), "bus2": (0, 1)}[cut]
        injection = Injection(tuple(sheet.at(*ct_pos[k]) for k in isolated), (), f"wire {cut} removed")
    elif violate and kind == "PR":
        target = rng.choice(("CT_B", "TB", "CT_C", "TC"))
        k = 1 if target.endswith("B") else 2
        if target.startswith("CT"):
            ct_pol[k] = "-"
            anchor = ct_pos[k]
        else:
            term_pol[k] = "-"
            anchor = term_pos[k]
        injection = Injection((sheet.at(*anchor),), ("polarity",), f"polarity flipped at {target}")
    elif violate and kind == "XS":
        a = rng.randrange(3)
        b = rng.choice((4, 5))
        wires["bridge"] = ("poly", [term_pos[a], (xs[a], -6.0), (xs[b], -6.0), term_pos[b]])
        injection = Injection((sheet.at(*term_pos[a]), sheet.at(*term_pos[b])), (), f"bridge T{a}-T{b}")
    elif violate and kind == "MPH":
        k = rng.randrange(3)
        ct_phase[k] = None
        injection = Injection((), (f"phase {phases[k]} absent",), f"phase {phases[k]} label dropped")
    elif violate and kind == "MI":
        i = rng.randrange(6)
        ids[i] = None
        injection = Injection((sheet.at(*term_pos[i]),), (), f"label of terminal {i} removed")
    elif violate and kind == "DI":
        i = rng.randrange(5)
        ids[i + 1] = ids[i]
        injection = Injection((sheet.at(*term_pos[i]), sheet.at(*term_pos[i + 1])), (ids[i],), f"{ids[i]} duplicated")
    elif violate and kind == "MA":
        i = rng.randrange(5)
        id_pos[i], id_pos[i + 1] = id_pos[i + 1], id_pos[i]
        injection = Injection((sheet.at(*term_pos[i]), sheet.at(*term_pos[i + 1])), (), f"labels {i}/{i + 1} swapped")

    # devices
    for k in range(3):
        sheet.insert("CT", ct_pos[k], CKT="1")
    sheet.insert("CB", cb_pos, CKT="1")
    sheet.insert("CB", cb2_pos, CKT="2")
    for pos in term_pos:
        sheet.terminal(pos)
    for g in grounds:
        sheet.ground(g[0], style, g[2])

    # wiring
    for shape, *pts in wires.values():
        if shape == "line":
            sheet.line(pts[0], pts[1])
        else:
            sheet.poly(pts[0])
    for g in grounds:
        sheet.line(g[1], g[0])

    # annotations
    for k in range(3):
        x, y = ct_pos[k]
        sheet.text((x + 2.0, y + 2.0), ct_pol[k])
        if ct_phase[k]:
            sheet.text((x - 2.0, y + 2.0), f"PH:{ct_phase[k]}")
    for i, (x, y) in enumerate(term_pos):
        if ids[i]:
            sheet.text(id_pos[i], f"ID:{ids[i]}")
        sheet.text((x - 2.0, y + 2.0), "CKT:1" if i < 4 else "CKT:2")
        if i < 3:
            sheet.text((x + 2.0, y + 2.0), term_pol[i])
    sheet.text((xs[3] + 2.0, 2.0), "ground_ok=true")
    sheet.text((xs[4] + 2.0, 2.0), f"PH:{aux_phase}")

    doc = Document(symbol_blocks(), sheet.entities)
    return BaseCase(
        case_id(kind, compliant, seed),
        kind,
        compliant,
        seed,
        write_document(doc),
        expected_statuses(kind, compliant),
        injection,
        doc,
    )


def default_suite(per_kind: int = 6, base_seed: int = 0) -> list[BaseCase]:
    """per_kind cases for every kind, half of them violation-free controls."""
    cases = []
    for kind in KINDS:
        for j in range(per_kind):
            cases.append(generate_case(kind, compliant=(j % 2 == 0), seed=base_seed + j))
    return cases

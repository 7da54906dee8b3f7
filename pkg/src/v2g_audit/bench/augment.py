"""Semantics-preserving variants of a base case: rotation, translation, scale, noise."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from ..dxf import Document, Line, Polyline, Similarity, transform_document, write_document
from .generator import WIRE_LAYER, BaseCase

FAMILIES = ("rotation", "translation", "scale", "noise")
ROTATIONS = (90.0, 180.0, 270.0)
MIN_VARIANTS, MAX_VARIANTS = 10, 20
TRANSLATION_RANGE = 500.0
SCALE_RANGE = (0.9, 1.1)
DEFAULT_JITTER = 0.05


@dataclass
class Variant:
    parent: str
    family: str
    params: dict
    dxf: bytes
    transform: Similarity
    document: Document | None = field(default=None, repr=False, compare=False)

    @property
    def variant_id(self) -> str:
        tag = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.parent}/{self.family}[{tag}]"


def _jitter_fn(rng: random.Random, jitter: float):
    def nudge(p):
        return (p[0] + rng.uniform(-jitter, jitter), p[1] + rng.uniform(-jitter, jitter))

    def apply(e):
        if e.layer != WIRE_LAYER:
            return e
        if isinstance(e, Line):
            return replace(e, p1=nudge(e.p1), p2=nudge(e.p2))
        if isinstance(e, Polyline):
            return replace(e, vertices=tuple(nudge(v) for v in e.vertices))
        return e

    return apply


def augment(
    base: BaseCase,
    count: int = 15,
    seed: int = 0,
    jitter: float = DEFAULT_JITTER,
    tau: float = 0.5,
) -> list[Variant]:
    """`count` variants: the three rotations, then translation/scale/noise in turn."""
    if not MIN_VARIANTS <= count <= MAX_VARIANTS:
        raise ValueError(f"count must lie in [{MIN_VARIANTS}, {MAX_VARIANTS}]")
    # two jittered endpoints that started together must stay within tau
    if not 0 <= jitter * 2**0.5 < tau / 2:
        raise ValueError("jitter too large for tau")
    doc = base.document
    if doc is None:
        from ..dxf import read_dxf

        doc = read_dxf(base.dxf)
    rng = random.Random(f"{base.case_id}|augment|{seed}")

    plans: list[tuple[str, dict]] = [("rotation", {"angle": a}) for a in ROTATIONS]
    others = ("translation", "scale", "noise")
    for k in range(count - len(ROTATIONS)):
        family = others[k % len(others)]
        if family == "translation":
            params = {
                "dx": round(rng.uniform(-TRANSLATION_RANGE, TRANSLATION_RANGE), 3),
                "dy": round(rng.uniform(-TRANSLATION_RANGE, TRANSLATION_RANGE), 3),
            }
        elif family == "scale":
            params = {"s": round(rng.uniform(*SCALE_RANGE), 4)}
        else:
            params = {"jitter": jitter, "seed": rng.randrange(2**31)}
        plans.append((family, params))

    out = []
    for family, params in plans:
        point_fn = None
        if family == "rotation":
            t = Similarity(rotation=params["angle"])
        elif family == "translation":
            t = Similarity(offset=(params["dx"], params["dy"]))
        elif family == "scale":
            t = Similarity(scale=params["s"])
        else:
            t = Similarity()
            point_fn = _jitter_fn(random.Random(params["seed"]), params["jitter"])
        vdoc = transform_document(doc, t, point_fn)
        out.append(Variant(base.case_id, family, params, write_document(vdoc), t, vdoc))
    return out

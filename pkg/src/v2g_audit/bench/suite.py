"""Suite manifest: JSON index plus DXF files under cases/<case_id>/."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from ..dxf import Similarity, read_dxf
from ..errors import ManifestError, V2GError
from .augment import Variant
from .generator import KINDS, BaseCase, Injection

MANIFEST_VERSION = 1


def _transform(family: str, params: dict) -> Similarity:
    if family == "rotation":
        return Similarity(rotation=float(params["angle"]))
    if family == "translation":
        return Similarity(offset=(float(params["dx"]), float(params["dy"])))
    if family == "scale":
        return Similarity(scale=float(params["s"]))
    if family == "noise":
        return Similarity()
    raise ValueError(f"unknown transform family {family!r}")


def write_suite(suite: Sequence[tuple[BaseCase, Sequence[Variant]]], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    entries = []
    for case, variants in suite:
        cdir = out / "cases" / case.case_id
        cdir.mkdir(parents=True, exist_ok=True)
        (cdir / "base.dxf").write_bytes(case.dxf)
        vlist = []
        for k, v in enumerate(variants):
            name = f"v{k:02d}-{v.family}.dxf"
            (cdir / name).write_bytes(v.dxf)
            vlist.append({"family": v.family, "params": v.params, "path": f"cases/{case.case_id}/{name}"})
        entries.append({
            "case_id": case.case_id,
            "kind": case.check_kind,
            "compliant": case.compliant,
            "seed": case.seed,
            "ground_truth": case.ground_truth,
            "injection": {
                "anchors": [list(a) for a in case.injection.anchors],
                "messages": list(case.injection.messages),
                "detail": case.injection.detail,
            },
            "path": f"cases/{case.case_id}/base.dxf",
            "variants": vlist,
        })
    manifest = out / "manifest.json"
    manifest.write_text(
        json.dumps({"version": MANIFEST_VERSION, "cases": entries}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return manifest


def load_suite(manifest: str | Path) -> list[tuple[BaseCase, list[Variant]]]:
    path = Path(manifest)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(path, str(exc)) from exc
    if not isinstance(data, dict) or data.get("version") != MANIFEST_VERSION:
        raise ManifestError(path, "missing or unsupported version")
    root = path.parent
    suite = []
    try:
        for e in data["cases"]:
            if e["kind"] not in KINDS:
                raise ManifestError(path, f"case {e['case_id']}: unknown kind {e['kind']!r}")
            dxf = (root / e["path"]).read_bytes()
            inj = e.get("injection", {})
            case = BaseCase(
                e["case_id"], e["kind"], bool(e["compliant"]), int(e["seed"]), dxf, dict(e["ground_truth"]),
                Injection(tuple(tuple(a) for a in inj.get("anchors", [])), tuple(inj.get("messages", [])),
                          inj.get("detail", "")),
                read_dxf(dxf),
            )
            variants = []
            for v in e.get("variants", []):
                vdxf = (root / v["path"]).read_bytes()
                variants.append(Variant(case.case_id, v["family"], dict(v["params"]), vdxf,
                                        _transform(v["family"], v["params"]), read_dxf(vdxf)))
            suite.append((case, variants))
    except ManifestError:
        raise
    except (KeyError, TypeError, ValueError, OSError, V2GError) as exc:
        raise ManifestError(path, f"{type(exc).__name__}: {exc}") from exc
    return suite

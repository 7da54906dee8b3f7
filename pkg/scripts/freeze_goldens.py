"""Regenerate the frozen fixtures and golden reports under tests/golden/.

Run only when a reviewed change is meant to alter the canonical output:

    python3 scripts/freeze_goldens.py
"""

from pathlib import Path

from v2g_audit.bench.generator import generate_case
from v2g_audit.pipeline import audit_bytes
from v2g_audit.planner import load_rules
from v2g_audit.report import to_structured, to_text

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"

FIXTURES = {
    "mp_fixture": ("MP", False, 7),
    "mg_fixture": ("MG", False, 7),
    "compliant_fixture": ("MP", True, 7),
}


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    rules = load_rules()
    for name, (kind, compliant, seed) in FIXTURES.items():
        dxf = generate_case(kind, compliant, seed).dxf
        (GOLDEN / f"{name}.dxf").write_bytes(dxf)
        _, report = audit_bytes(dxf, rules, source=f"{name}.dxf")
        (GOLDEN / f"{name}.report.json").write_bytes(to_structured(report))
        (GOLDEN / f"{name}.report.txt").write_text(to_text(report), encoding="utf-8")
        print(f"{name}: {report.summary['total']}")


if __name__ == "__main__":
    main()

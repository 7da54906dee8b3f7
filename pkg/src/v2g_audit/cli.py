"""Command-line entry point: ``v2g-audit {audit,graph,bench}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .builder import build_graph
from .dxf import read_dxf
from .errors import V2GError
from .pipeline import ABLATIONS, FORMATS, AuditConfig, audit_document
from .planner import HTTPPlannerClient, load_rules
from .report import exit_status, to_structured, to_text

log = logging.getLogger("v2g_audit")

EXIT_OK, EXIT_ERROR, EXIT_FAIL, EXIT_INDETERMINATE = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with AuditConfig fields; flags override it")
    p.add_argument("--tau", type=float, help="endpoint snapping tolerance (default 0.5)")
    p.add_argument("--text-radius", type=float, help="annotation attachment radius (default 5.0)")
    p.add_argument("--eps", type=float, help="zero-eigenvalue threshold (default 1e-8)")
    p.add_argument("--rules", help="rules JSON file (default: bundled benchmark rules)")
    p.add_argument("--planner-endpoint", help="remote planner URL; key read from PLANNER_API_KEY")
    p.add_argument("--format", choices=FORMATS, help="report format (default both)")
    p.add_argument("--ablate", action="append", choices=ABLATIONS, default=None,
                   help="disable a pipeline stage (repeatable)")
    p.add_argument("--out", help="output directory (audit, bench) or file (graph); default stdout")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="v2g-audit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="audit one DXF schematic against the rule set")
    p.add_argument("schematic")
    _common(p)

    p = sub.add_parser("graph", help="dump the property graph of a DXF schematic as JSON")
    p.add_argument("schematic")
    _common(p)

    p = sub.add_parser("bench", help="score the pipeline on a benchmark suite")
    p.add_argument("manifest", nargs="?", help="suite manifest.json (omit with --generate)")
    p.add_argument("--generate", action="store_true", help="generate the default suite in memory")
    p.add_argument("--seed", type=int, default=0, help="generator and augmentation seed (default 0)")
    p.add_argument("--per-kind", type=int, default=6, help="base cases per check kind (default 6)")
    p.add_argument("--variants", type=int, default=15, help="variants per base case, 10..20 (default 15)")
    p.add_argument("--bootstrap", type=int, default=2000, help="bootstrap trials for CIs (default 2000)")
    p.add_argument("--write-suite", help="also write the generated suite to this directory")
    _common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> AuditConfig:
    overrides = {
        "tau": args.tau,
        "text_radius": args.text_radius,
        "eps": args.eps,
        "rules": args.rules,
        "planner_endpoint": args.planner_endpoint,
        "format": args.format,
        "ablate": tuple(args.ablate) if args.ablate else None,
    }
    if args.config:
        return AuditConfig.from_file(args.config, **overrides)
    return AuditConfig(**{k: v for k, v in overrides.items() if v is not None})


def cmd_audit(args: argparse.Namespace, cfg: AuditConfig) -> int:
    path = Path(args.schematic)
    doc = read_dxf(path.read_bytes())
    client = HTTPPlannerClient.from_env(cfg.planner_endpoint)
    _, report = audit_document(doc, load_rules(cfg.rules), cfg, client, source=str(path))
    outputs = []
    if cfg.format in ("structured", "both"):
        outputs.append((".report.json", to_structured(report)))
    if cfg.format in ("text", "both"):
        outputs.append((".report.txt", to_text(report).encode("utf-8")))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for suffix, data in outputs:
            (out / (path.stem + suffix)).write_bytes(data)
    else:
        for _, data in outputs:
            sys.stdout.write(data.decode("utf-8"))
    return exit_status(report)


def cmd_graph(args: argparse.Namespace, cfg: AuditConfig) -> int:
    doc = read_dxf(Path(args.schematic).read_bytes())
    data = build_graph(doc, cfg.builder).to_json()
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, cfg: AuditConfig) -> int:
    from .bench.evaluate import OVERALL, build_suite, evaluate
    from .bench.generator import BENCH_CATEGORIES
    from .bench.stats import bootstrap_ci, mcnemar
    from .bench.suite import load_suite, write_suite
    from .errors import NoDiscordantPairs

    if args.generate == bool(args.manifest):
        raise SystemExit("bench: give exactly one of a manifest path or --generate")
    if args.generate:
        suite = build_suite(args.per_kind, args.variants, args.seed, tau=cfg.tau)
        if args.write_suite:
            write_suite(suite, args.write_suite)
    else:
        suite = load_suite(args.manifest)

    full_cfg = AuditConfig(**{**cfg.to_dict(), "ablate": ()})
    full = evaluate(suite, full_cfg)
    runs = [("full", full)]
    if cfg.ablate:
        runs.append(("ablate:" + "+".join(cfg.ablate), evaluate(suite, cfg)))

    metrics: dict = {"seed": args.seed, "base_cases": len(suite), "instances": len(full.instances), "runs": {}}
    for name, res in runs:
        print(f"[{name}] {len(res.base_correct)} base cases, {len(res.instances)} instances")
        sys.stdout.write(res.table())
        cis = {}
        for cat in list(BENCH_CATEGORIES) + [OVERALL]:
            lo, hi = bootstrap_ci(res.base_bits(cat), trials=args.bootstrap, seed=args.seed)
            cis[cat] = [lo, hi]
        print("95% CI  " + "  ".join(f"{c} [{100 * lo:.1f}, {100 * hi:.1f}]" for c, (lo, hi) in cis.items()))
        metrics["runs"][name] = {**res.to_dict(), "ci95": cis}
    if len(runs) == 2:
        try:
            stat, p = mcnemar(full.paired_with(runs[1][1]))
            print(f"McNemar full vs {runs[1][0]}: statistic {stat:.4f}, p {p:.3g}")
            metrics["mcnemar"] = {"statistic": stat, "p": p}
        except NoDiscordantPairs:
            print(f"McNemar full vs {runs[1][0]}: no discordant pairs")
            metrics["mcnemar"] = None
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK


COMMANDS = {"audit": cmd_audit, "graph": cmd_graph, "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](args, cfg)
    except (V2GError, OSError, ValueError) as exc:
        print(f"v2g-audit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

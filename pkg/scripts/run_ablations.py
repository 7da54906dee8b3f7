"""Compare the full pipeline against each ablation on a generated suite.

    python3 scripts/run_ablations.py --per-kind 6 --variants 15 --seed 0
"""

import argparse

from v2g_audit.bench.evaluate import OVERALL, build_suite, evaluate
from v2g_audit.bench.generator import BENCH_CATEGORIES
from v2g_audit.bench.stats import bootstrap_ci, mcnemar
from v2g_audit.errors import NoDiscordantPairs
from v2g_audit.pipeline import ABLATIONS, AuditConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--per-kind", type=int, default=6)
    ap.add_argument("--variants", type=int, default=15)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--bootstrap", type=int, default=2000)
    args = ap.parse_args()

    suite = build_suite(args.per_kind, args.variants, args.seed)
    full = evaluate(suite)
    cols = list(BENCH_CATEGORIES) + [OVERALL]
    print(f"{'config':<12}" + "".join(f"{c:>10}" for c in cols) + f"{'CI95':>16}{'McNemar p':>12}")

    def row(name, res, p=None):
        lo, hi = bootstrap_ci(res.base_bits(OVERALL), trials=args.bootstrap, seed=args.seed)
        accs = "".join(f"{100 * res.accuracy[c]:>9.1f}%" for c in cols)
        ci = f"[{100 * lo:.1f}, {100 * hi:.1f}]"
        print(f"{name:<12}{accs}{ci:>16}{'' if p is None else f'{p:.3g}':>12}")

    row("full", full)
    for ablation in ABLATIONS:
        res = evaluate(suite, AuditConfig(ablate=(ablation,)))
        try:
            _, p = mcnemar(full.paired_with(res))
        except NoDiscordantPairs:
            p = 1.0
        row(ablation, res, p)


if __name__ == "__main__":
    main()

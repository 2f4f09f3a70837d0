"""Hyperparameter importance of a table, over all configs and over the best ones.

    python scripts/fanova_report.py results/mini/toy_table.jsonl --percentile 0.1
"""

import argparse

from tabhpo.analysis import fanova_exact, importance_report
from tabhpo.table import load_table


def show(title, decomp, top_k):
    rep = importance_report(decomp, top_k)
    print(title)
    for name, frac in rep.unary:
        print(f"  {name:>14s}  {frac:.4f}")
    for a, b, frac in rep.pairwise:
        print(f"  {a + ' x ' + b:>30s}  {frac:.4f}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("table")
    p.add_argument("--metric", choices=("test", "valid"), default="test")
    p.add_argument("--percentile", type=float, default=0.1,
                   help="clamp errors above this quantile for the second report")
    p.add_argument("--top-k", type=int, default=5)
    args = p.parse_args()

    table = load_table(args.table)
    show("all configurations", fanova_exact(table, args.metric), args.top_k)
    show(f"errors clamped at the {args.percentile:g} quantile",
         fanova_exact(table, args.metric, percentile_clamp=args.percentile), args.top_k)


if __name__ == "__main__":
    main()

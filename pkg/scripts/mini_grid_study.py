"""Train a reduced grid on bundled toy regression data and check the two
learning-curve trends: seed noise shrinks with training, and the ranking at
small budgets agrees more with the final ranking as the budget grows.

    python scripts/mini_grid_study.py --out-dir results/mini
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from tabhpo.analysis import noise_all, rank_corr_budgets
from tabhpo.analysis.stats import ks_left_of
from tabhpo.cli import load_space
from tabhpo.data import make_toy_regression, prepare_dataset
from tabhpo.grid import run_grid
from tabhpo.table import save_table

ROOT = Path(__file__).resolve().parent.parent


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--space", default=str(ROOT / "configs" / "mini_space.json"))
    p.add_argument("--rows", type=int, default=500)
    p.add_argument("--seeds", type=int, default=2)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default="results/mini")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    space = load_space(args.space)
    data = make_toy_regression(args.rows, seed=args.seed)
    split = prepare_dataset(data, -1, np.random.default_rng(args.seed))
    table = run_grid(space, split, args.seeds, args.epochs, args.seed, out / "checkpoint",
                     args.jobs, timing="model", dataset_name="toy")
    save_table(table, out / "toy_table.jsonl")

    first, last = noise_all(table, 1), noise_all(table, args.epochs)
    stat, pval = ks_left_of(last, first)
    print(f"seed noise: median {np.median(first):.4g} at epoch 1, "
          f"{np.median(last):.4g} at epoch {args.epochs}; one-sided KS D={stat:.3f} p={pval:.3g}")

    budgets = sorted({max(1, args.epochs * k // 10) for k in (1, 2, 5, 10)})
    rho = rank_corr_budgets(table, budgets, (0.1, 0.5, 1.0))
    print("rank correlation to the final budget (top 10% / 50% / all):")
    for b, row in zip(budgets, rho):
        print(f"  epoch {b:3d}: " + "  ".join(f"{r:.3f}" for r in row))


if __name__ == "__main__":
    main()

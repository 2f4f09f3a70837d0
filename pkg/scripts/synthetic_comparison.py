"""Race every strategy on a separable synthetic table over the full nine-parameter
grid and test each against random search (one-sided Mann-Whitney on final regret).

    python scripts/synthetic_comparison.py --n-runs 100 --out-dir results/compare
"""

import argparse
import time

import numpy as np
from scipy.stats import mannwhitneyu

from tabhpo import harness
from tabhpo.optimizers import STRATEGIES
from tabhpo.space import table2_space
from tabhpo.synthetic import gen_synthetic, heteroscedastic_noise, separable_value


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--strategies", default=",".join(STRATEGIES))
    p.add_argument("--n-runs", type=int, default=100)
    p.add_argument("--max-evals", type=int, default=500)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default="results/compare")
    args = p.parse_args()

    space = table2_space()
    table = gen_synthetic(space, separable_value(space, args.seed),
                          heteroscedastic_noise(space, args.noise, args.seed), 4, 100, args.seed,
                          dataset_name="separable")
    strategies = args.strategies.split(",")
    t0 = time.perf_counter()
    report = harness.compare(strategies, table, args.n_runs, args.max_evals,
                             master_seed=args.seed, jobs=args.jobs)
    harness.write_report(report, args.out_dir)
    print(f"{len(strategies)} strategies x {args.n_runs} runs in {time.perf_counter() - t0:.0f} s")

    final = {s: np.array([tr.events[-1].test_regret for tr in report.traces[s]])
             for s in strategies}
    for s in strategies:
        line = f"{s:>5s}  median final regret {np.median(final[s]):.4f}"
        if s != "rs" and "rs" in final:
            pval = mannwhitneyu(final[s], final["rs"], alternative="less").pvalue
            line += f"  p(better than rs) = {pval:.2g}"
        print(line)


if __name__ == "__main__":
    main()

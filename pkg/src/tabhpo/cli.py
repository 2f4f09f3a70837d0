"""Command-line entry point: ``tabhpo <command> ...``.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Any flag may also be
set in a JSON ``--config`` file (keys are flag names without the leading
dashes); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, svg
from .analysis import (cross_dataset_rank_corr, ecdf, fanova_exact, importance_report,
                       local_neighborhood, noise_all, rank_corr_budgets)
from .analysis.stats import ks_left_of
from .data import DatasetError, prepare_dataset, read_delimited
from .grid import run_grid
from .optimizers import STRATEGIES, make_optimizer
from .space import ConfigSpace, DomainError, table2_space
from .synthetic import PRESETS, gen_synthetic, heteroscedastic_noise
from .table import TableError, global_optimum, load_table, query, save_table, validate

log = logging.getLogger("tabhpo")

JOBS_ENV = "TABHPO_JOBS"
ANALYSES = ("ecdf", "noise", "rank-corr", "fanova", "neighbors", "cross-rank")


class UsageError(Exception):
    pass


# -- helpers -----------------------------------------------------------------

def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{JOBS_ENV}={raw!r} is not an integer") from None


def load_space(spec: str) -> ConfigSpace:
    """``table2`` or a JSON file holding a table header (or just its space list)."""
    if spec == "table2":
        return table2_space()
    path = Path(spec)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise TableError(f"{path}:{e.lineno}: invalid JSON ({e.msg})") from None
    params = obj.get("space") if isinstance(obj, dict) else obj
    if params is None:
        raise TableError(f"{path}: space spec needs a 'space' field")
    try:
        return ConfigSpace.from_list(params)
    except (KeyError, TypeError, ValueError) as e:
        raise TableError(f"{path}: bad space definition ({e})") from None


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def resolve_config(table, text: str) -> int:
    if text == "best":
        return global_optimum(table)[0]
    try:
        c = int(text)
    except ValueError:
        raise UsageError(f"--config-index must be an integer or 'best', got {text!r}") from None
    if not 0 <= c < table.n_configs:
        raise UsageError(f"config {c} outside [0, {table.n_configs})")
    return c


def parse_params(items: list[str]) -> dict:
    """``strategy.key=value`` items into ``{strategy: {key: value}}`` (values parsed as JSON)."""
    out: dict = {}
    for item in items or []:
        head, sep, raw = item.partition("=")
        strategy, dot, key = head.partition(".")
        if not sep or not dot or not key:
            raise UsageError(f"--param expects strategy.key=value, got {item!r}")
        if strategy not in STRATEGIES:
            raise UsageError(f"unknown strategy {strategy!r}; available: {', '.join(STRATEGIES)}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        out.setdefault(strategy, {})[key] = value
    return out


def write_rows(path: Path, header: list, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _progress(done: int, total: int) -> None:
    if done == total or done % max(1, total // 20) == 0:
        log.info("trained %d / %d configs", done, total)


# -- commands ----------------------------------------------------------------

def cmd_gen_grid(args) -> int:
    header, data = read_delimited(args.data, args.delimiter)
    if args.target in header:
        target = header.index(args.target)
    else:
        try:
            target = int(args.target)
        except ValueError:
            raise UsageError(f"--target {args.target!r} is neither a column name nor an index "
                             f"(columns: {', '.join(header)})") from None
        if not -len(header) <= target < len(header):
            raise UsageError(f"--target {target} outside the {len(header)} columns")
    if abs(sum(args.ratios) - 1.0) > 1e-9 or len(args.ratios) != 3:
        raise UsageError(f"--ratios must be three fractions summing to 1, got {args.ratios}")
    space = load_space(args.space)
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 0]))
    split = prepare_dataset(data, target, rng, args.ratios)
    name = args.dataset_name or Path(args.data).stem
    table = run_grid(space, split, args.seeds, args.epochs, args.seed, args.checkpoint,
                     args.jobs, args.timing, name, _progress)
    save_table(table, args.out)
    print(f"wrote {args.out}: {table.n_configs} configs x {table.n_seeds} seeds "
          f"x {table.max_epochs} epochs, checksum {table.checksum()}")
    return 0


def cmd_gen_synth(args) -> int:
    space = load_space(args.space)
    value = PRESETS[args.preset](space, seed=args.seed)
    noise = heteroscedastic_noise(space, args.noise, seed=args.seed + 1)
    table = gen_synthetic(space, value, noise, args.seeds, args.epochs, args.seed,
                          decay_scale=args.decay, dataset_name=args.dataset_name or args.preset)
    save_table(table, args.out)
    print(f"wrote {args.out}: {table.n_configs} configs, checksum {table.checksum()}")
    return 0


def cmd_validate(args) -> int:
    table = load_table(args.table)
    problems = validate(table)
    for p in problems:
        print(p)
    if problems:
        return 1
    best, err = global_optimum(table)
    print(f"ok: {table.dataset_name}, {table.n_configs} configs, {table.n_seeds} seeds, "
          f"{table.max_epochs} epochs; best config {best} (mean test {err:.6g})")
    return 0


def cmd_query(args) -> int:
    table = load_table(args.table)
    config = resolve_config(table, args.config_index)
    budget = args.budget if args.budget is not None else table.max_epochs
    if not 1 <= budget <= table.max_epochs:
        raise UsageError(f"--budget {budget} outside [1, {table.max_epochs}]")
    q = query(table, config, budget, np.random.default_rng(args.seed))
    print(json.dumps({"config": config, "values": table.space.values_of(config),
                      "budget_epochs": budget, "valid_mse": q.valid_mse, "seed": q.seed_drawn,
                      "runtime_charged_seconds": q.runtime_charged_seconds}, sort_keys=True))
    return 0


def cmd_analyze(args) -> int:
    tables = [load_table(p) for p in args.tables]
    if args.analysis != "cross-rank" and len(tables) != 1:
        raise UsageError(f"analysis {args.analysis!r} takes exactly one table")
    if args.analysis == "cross-rank" and len(tables) < 2:
        raise UsageError("cross-rank needs at least two tables")
    out = Path(args.out_dir)
    t = tables[0]
    name = "-".join(x.dataset_name for x in tables) if args.analysis == "cross-rank" \
        else t.dataset_name
    stem = out / f"{args.analysis.replace('-', '_')}_{name}"
    csv_path, svg_text = stem.with_suffix(".csv"), None

    if args.analysis == "ecdf":
        e = ecdf(t.mean_test if args.metric == "test" else t.mean_valid_at(t.max_epochs))
        xs, ps = e.steps()
        write_rows(csv_path, ["error", "cdf"], zip(xs, ps))
        svg_text = svg.line_chart({t.dataset_name: (xs, ps)}, f"ECDF of mean {args.metric} error",
                                  f"{args.metric} mse", "cdf", logx=True, step=True)
    elif args.analysis == "noise":
        epochs = args.epochs or sorted({1, t.max_epochs})
        series, rows = {}, []
        for ep in epochs:
            if not 1 <= ep <= t.max_epochs:
                raise UsageError(f"epoch {ep} outside [1, {t.max_epochs}]")
            xs, ps = ecdf(noise_all(t, ep, args.split)).steps()
            series[f"epoch {ep}"] = (xs, ps)
            rows += [(ep, x, p) for x, p in zip(xs, ps)]
        write_rows(csv_path, ["epoch", "noise_std", "cdf"], rows)
        if len(epochs) >= 2:
            stat, pval = ks_left_of(noise_all(t, epochs[-1], args.split),
                                    noise_all(t, epochs[0], args.split))
            print(f"KS (epoch {epochs[-1]} left of epoch {epochs[0]}): D={stat:.4f} p={pval:.3g}")
        svg_text = svg.line_chart(series, "seed noise", "std across seeds", "cdf", logx=True,
                                  step=True)
    elif args.analysis == "rank-corr":
        budgets = args.budgets or sorted({max(1, t.max_epochs // k) for k in (10, 5, 2, 1)})
        for b in budgets:
            if not 1 <= b <= t.max_epochs:
                raise UsageError(f"budget {b} outside [1, {t.max_epochs}]")
        m = rank_corr_budgets(t, budgets, args.top, args.select_by)
        write_rows(csv_path, ["budget"] + [f"top_{f:g}" for f in args.top],
                   ([b] + list(m[i]) for i, b in enumerate(budgets)))
        svg_text = svg.line_chart({f"top {f:g}": (budgets, m[:, j]) for j, f in enumerate(args.top)},
                                  "rank correlation to final budget", "epochs", "spearman")
    elif args.analysis == "fanova":
        d = fanova_exact(t, args.metric, args.max_order, args.percentile)
        if d.degenerate:
            print("warning: zero total variance; all fractions reported as 0")
        rows = sorted(((d.label(u), len(u), d.variances[u], d.fraction(u)) for u in d.variances),
                      key=lambda r: (r[1], -r[3], r[0]))
        write_rows(csv_path, ["subset", "order", "variance", "fraction"], rows)
        rep = importance_report(d, args.top_k) if args.max_order >= 2 else None
        unary = sorted(d.unary(), key=lambda r: -r[1])
        svg_text = svg.bar_chart([n for n, _ in unary], [f for _, f in unary],
                                 "variance fraction per hyperparameter", "fraction")
        for n, f in unary:
            print(f"{n:>16s} {f:.4f}")
        if rep is not None:
            for a, b, f in rep.pairwise:
                print(f"{a + ' x ' + b:>32s} {f:.4f}")
    elif args.analysis == "neighbors":
        config = resolve_config(t, args.config_index)
        rows = local_neighborhood(t, config, args.metric)
        write_rows(csv_path, ["param", "old_value", "new_value", "config", "error",
                              "relative_change"],
                   ((r.param, r.old_value, r.new_value, r.config, r.error, r.relative_change)
                    for r in rows))
        print(f"reference config {config}: {json.dumps(t.space.values_of(config))}")
    else:
        m = cross_dataset_rank_corr(tables, args.top[0] if args.top else 1.0)
        names = [x.dataset_name for x in tables]
        write_rows(csv_path, ["dataset"] + names, ([n] + list(m[i]) for i, n in enumerate(names)))
    if svg_text is not None and not args.no_svg:
        stem.with_suffix(".svg").write_text(svg_text, encoding="utf-8")
    print(f"wrote {csv_path}")
    return 0


def _check_strategies(names: list[str], params: dict) -> None:
    unknown = [s for s in names if s not in STRATEGIES]
    if unknown:
        raise UsageError(f"unknown strategy {unknown[0]!r}; available: {', '.join(STRATEGIES)}")
    if not names:
        raise UsageError("no strategies given")
    probe = table2_space()
    for s in names:
        try:
            make_optimizer(s, probe, 100, np.random.default_rng(0), **params.get(s, {}))
        except TypeError as e:
            raise UsageError(f"bad --param for {s}: {e}") from None


def cmd_run(args) -> int:
    all_params = parse_params(args.param)
    _check_strategies([args.strategy], all_params)
    table = load_table(args.table)
    params = all_params.get(args.strategy)
    tr = harness.run_once(args.strategy, table, args.seed, args.max_evals, args.max_seconds,
                          args.incumbent_mode, params)
    rows = ((k, e.config, e.budget_epochs, e.valid_mse, e.cumulative_seconds, e.incumbent,
             e.test_regret) for k, e in enumerate(tr.events))
    header = ["event", "config_index", "budget", "valid_mse", "cum_seconds", "incumbent_index",
              "regret"]
    if args.out:
        write_rows(Path(args.out), header, rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)
    if tr.error:
        print(f"strategy failed: {tr.error}", file=sys.stderr)
        return 1
    return 0


def cmd_compare(args) -> int:
    params = parse_params(args.param)
    _check_strategies(args.strategies, params)
    if args.max_evals is None and args.max_seconds is None:
        raise UsageError("give --max-evals and/or --max-seconds")
    table = load_table(args.table)
    report = harness.compare(args.strategies, table, args.n_runs, args.max_evals,
                             args.max_seconds, args.seed, args.jobs, cutoff=args.cutoff,
                             incumbent_mode=args.incumbent_mode,
                             strategy_params=params)
    checksums = harness.write_report(report, args.out_dir, svg=not args.no_svg)
    for s in args.strategies:
        final = np.sort([tr.regret_at(report.cutoff) for tr in report.traces[s]])
        print(f"{s:>6s} median final regret {harness.nearest_rank(final, 0.5):.6g} "
              f"({report.meta['failed_runs'][s]} failed runs)")
    print(f"wrote {args.out_dir} (traces.csv {checksums['traces.csv'][:12]})")
    return 1 if any(report.meta["failed_runs"].values()) else 0


def cmd_report(args) -> int:
    out = Path(args.bundle)
    for name in ("curves.csv", "ecdf.csv", "meta.json"):
        if not (out / name).exists():
            raise TableError(f"{out}: not a report bundle (missing {name})")
    for p in svg.write_report_plots(out):
        print(f"wrote {p}")
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tabhpo", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of flag defaults")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = p.add_subparsers(dest="command", required=True)
    add = sub.add_parser

    def sub_add(name, **kw):
        return add(name, parents=[common], **kw)

    sub.add_parser = sub_add

    def seed_flag(sp):
        sp.add_argument("--seed", type=int, default=0, help="master seed (default 0)")

    g = sub.add_parser("gen-grid", help="train every config of a space on a dataset")
    g.add_argument("--data", required=True, help="delimited text file with a header row")
    g.add_argument("--target", required=True, help="target column name or index")
    g.add_argument("--delimiter", default=None, help="field delimiter (default: sniff)")
    g.add_argument("--ratios", type=float_list, default=[0.6, 0.2, 0.2])
    g.add_argument("--space", default="table2", help="space spec JSON or 'table2'")
    g.add_argument("--seeds", type=int, default=4)
    g.add_argument("--epochs", type=int, default=100)
    g.add_argument("--out", required=True)
    g.add_argument("--checkpoint", default=None, help="checkpoint directory (resumable)")
    g.add_argument("--jobs", type=int, default=None)
    g.add_argument("--timing", choices=("wall", "model"), default="wall")
    g.add_argument("--dataset-name", default=None)
    seed_flag(g)
    g.set_defaults(func=cmd_gen_grid)

    s = sub.add_parser("gen-synth", help="fabricate a table with known structure")
    s.add_argument("--space", default="table2")
    s.add_argument("--preset", choices=sorted(PRESETS), default="separable")
    s.add_argument("--noise", type=float, default=0.05, help="mean seed-noise scale")
    s.add_argument("--decay", type=float, default=1.0, help="learning-curve excess at epoch 0")
    s.add_argument("--seeds", type=int, default=4)
    s.add_argument("--epochs", type=int, default=100)
    s.add_argument("--out", required=True)
    s.add_argument("--dataset-name", default=None)
    seed_flag(s)
    s.set_defaults(func=cmd_gen_synth)

    v = sub.add_parser("validate", help="check a table file")
    v.add_argument("table")
    v.set_defaults(func=cmd_validate)

    q = sub.add_parser("query", help="one noisy lookup")
    q.add_argument("table")
    q.add_argument("--config-index", default="best", help="config index or 'best'")
    q.add_argument("--budget", type=int, default=None, help="epochs (default: max)")
    seed_flag(q)
    q.set_defaults(func=cmd_query)

    a = sub.add_parser("analyze", help="table statistics and importance analyses")
    a.add_argument("analysis", choices=ANALYSES)
    a.add_argument("tables", nargs="+")
    a.add_argument("--out-dir", default=".")
    a.add_argument("--metric", choices=("test", "valid"), default="test")
    a.add_argument("--epochs", type=int_list, default=None, help="noise: epochs to compare")
    a.add_argument("--split", choices=("valid", "train", "test"), default="valid")
    a.add_argument("--budgets", type=int_list, default=None)
    a.add_argument("--top", type=float_list, default=[0.01, 0.1, 0.2, 0.5, 1.0])
    a.add_argument("--select-by", choices=("test", "valid"), default="test")
    a.add_argument("--percentile", type=float, default=None, help="fanova clamp quantile")
    a.add_argument("--max-order", type=int, default=2)
    a.add_argument("--top-k", type=int, default=10)
    a.add_argument("--config-index", default="best")
    a.add_argument("--no-svg", action="store_true")
    a.set_defaults(func=cmd_analyze)

    def race_flags(sp):
        sp.add_argument("table")
        sp.add_argument("--max-evals", type=int, default=500)
        sp.add_argument("--max-seconds", type=float, default=None)
        sp.add_argument("--incumbent-mode", choices=("any", "max_budget"), default="any")
        sp.add_argument("--param", action="append", default=[],
                        help="strategy meta-parameter, e.g. bohb.gamma=0.2 (repeatable)")
        seed_flag(sp)

    r = sub.add_parser("run", help="one optimizer run; trace CSV to --out or stdout")
    race_flags(r)
    r.add_argument("--strategy", default="rs", help=f"one of {', '.join(STRATEGIES)}")
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="many seeded runs per strategy, report bundle")
    race_flags(c)
    c.add_argument("--strategies", type=str_list, default=list(STRATEGIES))
    c.add_argument("--n-runs", type=int, default=500)
    c.add_argument("--cutoff", type=float, default=None, help="final-regret time (seconds)")
    c.add_argument("--jobs", type=int, default=None)
    c.add_argument("--out-dir", required=True)
    c.add_argument("--no-svg", action="store_true")
    c.set_defaults(func=cmd_compare)

    rp = sub.add_parser("report", help="re-render plots of a report bundle")
    rp.add_argument("bundle")
    rp.set_defaults(func=cmd_report)
    return p


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise KeyError(command)


def _config_overlay(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Install ``--config`` file values as subcommand defaults (before the real parse,
    so a config file can also supply required flags)."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if not a.startswith("-")), None)
    if not known.config or command is None:
        return
    try:
        sp = _subparser(parser, command)
    except KeyError:
        return  # the real parse reports the bad command
    try:
        overlay = json.loads(Path(known.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        sp.error(f"--config {known.config}: {e}")
    if not isinstance(overlay, dict):
        sp.error(f"--config {known.config}: expected a JSON object")
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, value in overlay.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in actions or dest in ("help", "config"):
            sp.error(f"--config {known.config}: unknown key {key!r} for {command}")
        action = actions[dest]
        if isinstance(value, list) and action.type in (float_list, int_list, str_list):
            value = ",".join(str(x) for x in value)
        if isinstance(value, str) and action.type is not None:
            try:
                value = action.type(value)
            except (argparse.ArgumentTypeError, ValueError) as e:
                sp.error(f"--config {known.config}: key {key!r}: {e}")
        defaults[dest] = value
        action.required = False
    sp.set_defaults(**defaults)


def parse_args(argv=None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    _config_overlay(parser, argv)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if hasattr(args, "jobs") and args.jobs is None:
            args.jobs = default_jobs()
        return args.func(args)
    except UsageError as e:
        print(f"tabhpo {args.command}: error: {e}", file=sys.stderr)
        return 2
    except (TableError, DatasetError, DomainError, OSError, ValueError, ZeroDivisionError) as e:
        print(f"tabhpo {args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Optimizer races against a table on a simulated clock."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import multiprocessing
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis.stats import Ecdf, ecdf
from .optimizers import Observation, make_optimizer
from .table import BenchTable, global_optimum, query

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Event:
    config: int
    budget_epochs: int
    valid_mse: float
    charged_seconds: float
    cumulative_seconds: float
    incumbent: int
    incumbent_valid: float
    test_regret: float


@dataclass
class RunTrace:
    strategy: str
    seed: int
    events: list = field(default_factory=list)
    error: str | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([e.cumulative_seconds for e in self.events])

    @property
    def regrets(self) -> np.ndarray:
        return np.array([e.test_regret for e in self.events])

    def regret_at(self, t: float) -> float:
        """Regret of the incumbent at simulated time ``t``; before the first event
        the first incumbent's regret is reported."""
        if not self.events:
            return math.nan
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.events[max(k, 0)].test_regret


def run_once(strategy: str, table: BenchTable, seed: int, max_evals: int | None = 500,
             max_seconds: float | None = None, incumbent_mode: str = "any",
             strategy_params: dict | None = None) -> RunTrace:
    """One optimizer run: suggest, look up, observe, until a stop condition.

    The clock advances only by the charged training time of each lookup, summed
    left to right. The incumbent is the config with the lowest observed
    validation error (``incumbent_mode="max_budget"`` only counts full-budget
    observations once one exists). Exceptions raised by the strategy end the
    run; the partial trace is kept and ``error`` set.
    """
    if max_evals is None and max_seconds is None:
        raise ValueError("need max_evals or max_seconds")
    if incumbent_mode not in ("any", "max_budget"):
        raise ValueError(f"unknown incumbent_mode {incumbent_mode!r}")
    opt_seq, query_seq = np.random.SeedSequence(int(seed)).spawn(2)
    opt_rng, query_rng = np.random.default_rng(opt_seq), np.random.default_rng(query_seq)
    trace = RunTrace(strategy, int(seed))
    _, best_test = global_optimum(table)
    mean_test = table.mean_test
    try:
        opt = make_optimizer(strategy, table.space, table.max_epochs, opt_rng,
                             **(strategy_params or {}))
    except TypeError as e:
        raise ValueError(f"bad parameters for strategy {strategy!r}: {e}") from None

    clock = 0.0
    inc, inc_valid = -1, math.inf
    full_inc, full_valid = -1, math.inf
    try:
        while max_evals is None or len(trace.events) < max_evals:
            if max_seconds is not None and clock >= max_seconds:
                break
            s = opt.suggest()
            if s is None:
                break
            q = query(table, s.config, s.budget_epochs, query_rng)
            clock = clock + q.runtime_charged_seconds
            if q.valid_mse < inc_valid:
                inc, inc_valid = s.config, q.valid_mse
            if s.budget_epochs == table.max_epochs and q.valid_mse < full_valid:
                full_inc, full_valid = s.config, q.valid_mse
            if incumbent_mode == "max_budget" and full_inc >= 0:
                cur, cur_valid = full_inc, full_valid
            else:
                cur, cur_valid = inc, inc_valid
            trace.events.append(Event(
                s.config, s.budget_epochs, q.valid_mse, q.runtime_charged_seconds, clock,
                cur, cur_valid, float(mean_test[cur]) - best_test))
            opt.observe(Observation(s.config, s.budget_epochs, q.valid_mse,
                                    q.runtime_charged_seconds))
    except Exception as e:  # noqa: BLE001 - keep partial traces of failing strategies
        log.warning("strategy %s (seed %d) failed after %d events: %r",
                    strategy, seed, len(trace.events), e)
        trace.error = repr(e)
    return trace


# -- aggregation -------------------------------------------------------------

def nearest_rank(sorted_values: np.ndarray, q: float) -> float:
    n = len(sorted_values)
    rank = max(1, math.ceil(q * n - 1e-12))
    return float(sorted_values[min(rank, n) - 1])


@dataclass
class AggregateCurve:
    times: np.ndarray
    median: np.ndarray
    q25: np.ndarray
    q75: np.ndarray


def regret_matrix(traces: Sequence[RunTrace], time_grid) -> np.ndarray:
    """(n_traces, n_times) step-interpolated regrets."""
    return np.array([[t.regret_at(x) for x in time_grid] for t in traces])


def aggregate(traces: Sequence[RunTrace], time_grid) -> AggregateCurve:
    time_grid = np.asarray(time_grid, dtype=np.float64)
    if not len(traces):
        raise ValueError("aggregate needs at least one trace")
    if time_grid.size == 0:
        raise ValueError("aggregate needs a nonempty time grid")
    r = np.sort(regret_matrix(traces, time_grid), axis=0)
    cols = [r[:, j] for j in range(len(time_grid))]
    return AggregateCurve(
        time_grid,
        np.array([nearest_rank(c, 0.5) for c in cols]),
        np.array([nearest_rank(c, 0.25) for c in cols]),
        np.array([nearest_rank(c, 0.75) for c in cols]),
    )


def final_regret_ecdf(traces: Sequence[RunTrace], t_cutoff: float) -> Ecdf:
    return ecdf([t.regret_at(t_cutoff) for t in traces])


def default_time_grid(traces: Sequence[RunTrace], n_points: int = 100) -> np.ndarray:
    starts = [t.events[0].cumulative_seconds for t in traces if t.events]
    ends = [t.events[-1].cumulative_seconds for t in traces if t.events]
    if not starts:
        return np.array([0.0])
    lo, hi = min(starts), max(ends)
    if hi <= lo:
        return np.array([lo])
    return np.geomspace(lo, hi, n_points)


# -- multi-run comparison ----------------------------------------------------

def run_seed(master_seed: int, strategy: str, run_index: int) -> int:
    ss = np.random.SeedSequence([int(master_seed), zlib.crc32(strategy.encode()), int(run_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


_SHARED_TABLE: BenchTable | None = None


def _run_task(args) -> RunTrace:
    strategy, seed, max_evals, max_seconds, mode, params = args
    return run_once(strategy, _SHARED_TABLE, seed, max_evals, max_seconds, mode, params)


@dataclass
class Report:
    strategies: list
    traces: dict  # strategy -> list of RunTrace in run order
    time_grid: np.ndarray
    curves: dict  # strategy -> AggregateCurve
    cutoff: float
    ecdfs: dict  # strategy -> Ecdf of final regret at cutoff
    meta: dict


def compare(strategies: Sequence[str], table: BenchTable, n_runs: int = 500,
            max_evals: int | None = 500, max_seconds: float | None = None,
            master_seed: int = 0, jobs: int = 1, time_grid=None, cutoff: float | None = None,
            incumbent_mode: str = "any", strategy_params: dict | None = None) -> Report:
    """Run ``n_runs`` seeded instances of each strategy and aggregate them.

    Run seeds depend only on ``(master_seed, strategy, run_index)``, so reports
    are reproducible and independent of ``jobs``.
    """
    global _SHARED_TABLE
    strategy_params = strategy_params or {}
    tasks = [(s, run_seed(master_seed, s, i), max_evals, max_seconds, incumbent_mode,
              strategy_params.get(s)) for s in strategies for i in range(n_runs)]
    _SHARED_TABLE = table
    try:
        if jobs > 1 and len(tasks) > 1:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(jobs) as pool:
                results = pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs)))
        else:
            results = [_run_task(t) for t in tasks]
    finally:
        _SHARED_TABLE = None
    traces = {s: results[k * n_runs:(k + 1) * n_runs] for k, s in enumerate(strategies)}
    every = [t for ts in traces.values() for t in ts]
    grid = default_time_grid(every) if time_grid is None else np.asarray(time_grid, float)
    cutoff = float(grid[-1]) if cutoff is None else float(cutoff)
    meta = {
        "strategies": list(strategies), "n_runs": n_runs, "max_evals": max_evals,
        "max_seconds": max_seconds, "master_seed": master_seed,
        "incumbent_mode": incumbent_mode, "strategy_params": strategy_params,
        "cutoff_seconds": cutoff,
        "run_seeds": {s: [t.seed for t in traces[s]] for s in strategies},
        "failed_runs": {s: sum(t.error is not None for t in traces[s]) for s in strategies},
        "table": {"dataset_name": table.dataset_name, "checksum": table.checksum(),
                  "n_configs": table.n_configs, "max_epochs": table.max_epochs},
    }
    return Report(
        list(strategies), traces, grid,
        {s: aggregate(traces[s], grid) for s in strategies}, cutoff,
        {s: final_regret_ecdf(traces[s], cutoff) for s in strategies}, meta,
    )


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def traces_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy", "run", "event", "config_index", "budget", "valid_mse",
                "cum_seconds", "incumbent_index", "regret"])
    for s in sorted(report.strategies):
        for run, tr in enumerate(report.traces[s]):
            for k, e in enumerate(tr.events):
                w.writerow([s, run, k, e.config, e.budget_epochs, _fmt(e.valid_mse),
                            _fmt(e.cumulative_seconds), e.incumbent, _fmt(e.test_regret)])
    return buf.getvalue()


def curves_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy", "time", "median", "q25", "q75"])
    for s in sorted(report.strategies):
        c = report.curves[s]
        for j in range(len(c.times)):
            w.writerow([s, _fmt(c.times[j]), _fmt(c.median[j]), _fmt(c.q25[j]), _fmt(c.q75[j])])
    return buf.getvalue()


def ecdf_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy", "final_regret", "cdf"])
    for s in sorted(report.strategies):
        xs, ps = report.ecdfs[s].steps()
        for x, p in zip(xs, ps):
            w.writerow([s, _fmt(x), _fmt(p)])
    return buf.getvalue()


def write_report(report: Report, out_dir, svg: bool = True) -> dict:
    """Write the report bundle; returns ``{filename: sha256}`` of the CSVs."""
    import hashlib
    from . import svg as svgplot

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {"traces.csv": traces_csv(report), "curves.csv": curves_csv(report),
             "ecdf.csv": ecdf_csv(report)}
    checksums = {}
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
        checksums[name] = hashlib.sha256(text.encode()).hexdigest()
    meta = dict(report.meta, checksums=checksums)
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                   encoding="utf-8")
    if svg:
        svgplot.write_report_plots(out)
    return checksums

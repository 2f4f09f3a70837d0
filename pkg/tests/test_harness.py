import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_space
from oracles import nearest_rank_oracle
from tabhpo import harness
from tabhpo.harness import RunTrace, aggregate, compare, nearest_rank, run_once
from tabhpo.optimizers import STRATEGIES
from tabhpo.optimizers.base import Optimizer, Suggestion
from tabhpo.synthetic import gen_synthetic, separable_value
from tabhpo.table import global_optimum

ALL = tuple(STRATEGIES)


def _trace(times, regrets):
    tr = RunTrace("x", 0)
    tr.events = [harness.Event(0, 1, 0.0, 0.0, t, 0, 0.0, r) for t, r in zip(times, regrets)]
    return tr


@pytest.mark.parametrize("strategy", ALL)
def test_clock_is_the_left_to_right_sum_of_charges(strategy, small_table):
    tr = run_once(strategy, small_table, seed=11, max_evals=60)
    assert tr.error is None and len(tr.events) > 0
    clock = 0.0
    for e in tr.events:
        clock = clock + e.charged_seconds
        assert e.cumulative_seconds == clock
        assert e.charged_seconds == small_table.runtime[e.config, 0] * e.budget_epochs \
            / small_table.max_epochs


@pytest.mark.parametrize("strategy", ALL)
def test_incumbent_and_regret_invariants(strategy, small_table):
    tr = run_once(strategy, small_table, seed=5, max_evals=80)
    _, best = global_optimum(small_table)
    inc_valid = [e.incumbent_valid for e in tr.events]
    assert all(a >= b for a, b in zip(inc_valid, inc_valid[1:]))
    assert min(e.valid_mse for e in tr.events) == inc_valid[-1]
    for e in tr.events:
        assert e.test_regret >= 0
        assert e.test_regret == small_table.mean_test[e.incumbent] - best


def test_runs_are_deterministic(small_table):
    a = run_once("tpe", small_table, 3, 40)
    b = run_once("tpe", small_table, 3, 40)
    c = run_once("tpe", small_table, 4, 40)
    assert a.events == b.events and a.events != c.events


def test_max_seconds_stops_after_crossing(small_table):
    tr = run_once("rs", small_table, 0, max_evals=None, max_seconds=100.0)
    assert tr.events[-1].cumulative_seconds >= 100.0
    assert tr.events[-2].cumulative_seconds < 100.0
    with pytest.raises(ValueError):
        run_once("rs", small_table, 0, max_evals=None, max_seconds=None)


def test_bad_parameters_and_modes(small_table):
    with pytest.raises(ValueError, match="bad parameters"):
        run_once("rs", small_table, 0, 5, strategy_params={"nope": 1})
    with pytest.raises(ValueError, match="incumbent_mode"):
        run_once("rs", small_table, 0, 5, incumbent_mode="best")


class _Exploding(Optimizer):
    name = "boom"

    def suggest(self):
        if len(self.seen) >= 3:
            raise RuntimeError("boom")
        return Suggestion(self.random_config(), self.max_epochs)

    def observe(self, obs):
        self.seen.append(obs)

    def __init__(self, *a, **k):
        super().__init__(*a, **k)
        self.seen = []


def test_failing_strategy_keeps_partial_trace(small_table, monkeypatch):
    monkeypatch.setitem(STRATEGIES, "boom", _Exploding)
    tr = run_once("boom", small_table, 0, 10)
    assert len(tr.events) == 3 and "boom" in tr.error
    rep = compare(["boom", "rs"], small_table, n_runs=2, max_evals=5)
    assert rep.meta["failed_runs"] == {"boom": 2, "rs": 0}


def test_max_budget_incumbent_mode(small_table):
    tr = run_once("hb", small_table, 2, 40, incumbent_mode="max_budget")
    full = None
    for e in tr.events:
        if e.budget_epochs == small_table.max_epochs and (full is None or e.valid_mse < full[1]):
            full = (e.config, e.valid_mse)
        if full is not None:
            assert (e.incumbent, e.incumbent_valid) == full


def test_hyperband_cycle_cost_on_the_clock():
    sp = small_space()
    table = gen_synthetic(sp, separable_value(sp), 0.01, 2, 100, 0,
                          runtime_fn=lambda n: np.full(len(n), 10.0))
    tr = run_once("hb", table, 0, max_evals=24)
    assert [e.budget_epochs for e in tr.events[:9]] == [11] * 9
    assert sum(e.budget_epochs for e in tr.events) == 996
    assert tr.events[-1].cumulative_seconds == pytest.approx(99.6, abs=1e-9)


# -- aggregation -------------------------------------------------------------

def test_regret_at_is_a_right_continuous_step():
    tr = _trace([1.0, 3.0], [0.5, 0.2])
    assert tr.regret_at(0.0) == 0.5  # before the first event
    assert tr.regret_at(1.0) == 0.5
    assert tr.regret_at(2.999) == 0.5
    assert tr.regret_at(3.0) == 0.2
    assert math.isnan(RunTrace("x", 0).regret_at(1.0))


def test_aggregate_small_case():
    traces = [_trace([1.0], [r]) for r in (1.0, 2.0, 3.0)]
    c = aggregate(traces, [1.0])
    assert (c.median[0], c.q25[0], c.q75[0]) == (2.0, 1.0, 3.0)
    one = aggregate([_trace([1.0], [0.7])], [0.5, 2.0])
    assert np.all(one.median == 0.7) and np.all(one.q25 == 0.7)
    with pytest.raises(ValueError):
        aggregate([], [1.0])


@settings(max_examples=100)
@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=40),
       st.sampled_from([0.25, 0.5, 0.75]))
def test_nearest_rank_matches_oracle(values, q):
    assert nearest_rank(np.sort(values), q) == nearest_rank_oracle(values, q)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_aggregate_is_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    traces = [_trace(np.sort(rng.random(4)) * 10, np.sort(rng.random(4))[::-1])
              for _ in range(7)]
    grid = np.linspace(0, 10, 13)
    a = aggregate(traces, grid)
    b = aggregate([traces[i] for i in rng.permutation(7)], grid)
    assert np.array_equal(a.median, b.median) and np.array_equal(a.q75, b.q75)
    for j, t in enumerate(grid):
        col = [tr.regret_at(t) for tr in traces]
        assert a.median[j] == nearest_rank_oracle(col, 0.5)
        assert a.q25[j] == nearest_rank_oracle(col, 0.25)


# -- compare -----------------------------------------------------------------

def test_compare_is_reproducible_and_jobs_independent(small_table, tmp_path):
    a = compare(["rs", "re"], small_table, n_runs=4, max_evals=15, master_seed=9)
    b = compare(["rs", "re"], small_table, n_runs=4, max_evals=15, master_seed=9, jobs=2)
    assert harness.traces_csv(a) == harness.traces_csv(b)
    assert harness.curves_csv(a) == harness.curves_csv(b)
    # a strategy's runs do not depend on which other strategies are compared
    c = compare(["re"], small_table, n_runs=4, max_evals=15, master_seed=9)
    assert [t.events for t in c.traces["re"]] == [t.events for t in a.traces["re"]]
    s1 = harness.write_report(a, tmp_path / "a", svg=True)
    s2 = harness.write_report(b, tmp_path / "b", svg=False)
    assert s1 == s2
    assert (tmp_path / "a" / "curves.svg").exists()


def test_compare_single_run(small_table):
    rep = compare(["rs"], small_table, n_runs=1, max_evals=5)
    tr = rep.traces["rs"][0]
    assert len(tr.events) == 5
    assert np.array_equal(rep.curves["rs"].median, rep.curves["rs"].q25)
    assert rep.ecdfs["rs"].n == 1
    assert rep.meta["table"]["checksum"] == small_table.checksum()


def test_run_seeds_are_distinct():
    seeds = {harness.run_seed(0, s, i) for s in ALL for i in range(50)}
    assert len(seeds) == 50 * len(ALL)

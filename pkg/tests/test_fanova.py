import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import small_space
from oracles import grid_dict, sobol_variances
from tabhpo.analysis import fanova_exact, fanova_grid, fanova_values, importance_report
from tabhpo.analysis.fanova import clamp_at_quantile
from tabhpo.space import table2_space
from tabhpo.synthetic import gen_synthetic, separable_value


def test_single_variable_function():
    d = fanova_grid(np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert d.total_variance == 0.25
    assert d.fraction({0}) == 1.0 and d.fraction({1}) == 0.0 and d.fraction({0, 1}) == 0.0


def test_product_function():
    d = fanova_grid(np.array([[0.0, 0.0], [0.0, 1.0]]))
    assert d.total_variance == 0.1875
    for u in ({0}, {1}, {0, 1}):
        assert d.fraction(u) == pytest.approx(1 / 3, abs=1e-15)


def test_constant_grid_is_degenerate():
    d = fanova_grid(np.full((2, 3), 4.0))
    assert d.degenerate and d.fraction({0}) == 0.0


def grids():
    shapes = st.lists(st.integers(1, 4), min_size=1, max_size=4).map(tuple)
    return shapes.flatmap(lambda s: hnp.arrays(np.float64, s, elements=st.floats(-10, 10)))


@settings(max_examples=60, deadline=None)
@given(grids())
def test_matches_inclusion_exclusion_oracle(y):
    d = fanova_grid(y)
    ref = sobol_variances(grid_dict(y), y.shape, y.ndim)
    scale = max(d.total_variance, 1e-300)
    for u, v in ref.items():
        assert abs(d.variances[u] - v) <= 1e-9 * scale + 1e-12
    assert sum(d.variances.values()) == pytest.approx(d.total_variance, rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(grids())
def test_components_have_zero_marginals(y):
    d = fanova_grid(y, keep_components=True)
    for u, f in d.components.items():
        for axis in u:
            assert np.allclose(f.mean(axis=axis), 0.0, atol=1e-9)


def test_additive_table_has_no_interactions():
    sp = small_space()
    t = gen_synthetic(sp, separable_value(sp, 0), 0.0, 1, 2, 0)
    d = fanova_exact(t, max_order=3)
    assert sum(d.fraction(u) for u in d.variances if len(u) == 1) == pytest.approx(1.0)
    assert all(abs(d.fraction(u)) < 1e-12 for u in d.variances if len(u) > 1)


def test_percentile_clamp():
    y = np.arange(10.0)
    c, q = clamp_at_quantile(y, 0.5)
    assert q == 4.5 and c.max() == 4.5 and c[:4].tolist() == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        clamp_at_quantile(y, 0.0)
    d = fanova_grid(np.arange(12.0).reshape(3, 4), percentile_clamp=0.25)
    assert d.clamp_value == pytest.approx(np.quantile(np.arange(12.0), 0.25))


def test_max_order_limits_components():
    d = fanova_grid(np.random.default_rng(0).random((2, 3, 2)), max_order=1)
    assert all(len(u) == 1 for u in d.variances)
    with pytest.raises(ValueError):
        fanova_grid(np.zeros((2, 2)), max_order=3)


def test_values_in_index_order():
    sp = table2_space()
    rng = np.random.default_rng(1)
    w = rng.random(9)
    pos = sp.all_positions()
    d = fanova_values(sp, pos @ w, max_order=1)
    # a linear function: unary variance is w_j^2 * var(position_j)
    expect = w ** 2 * np.array([np.var(np.arange(c)) for c in sp.shape])
    assert np.allclose([d.variances[frozenset({j})] for j in range(9)], expect)


def test_importance_report(small_table):
    rep = importance_report(fanova_exact(small_table), top_k=2)
    assert [n for n, _ in rep.unary][0] in small_table.space.names
    assert len(rep.pairwise) == 2
    assert rep.unary == sorted(rep.unary, key=lambda t: -t[1])

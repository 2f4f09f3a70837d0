import numpy as np
import pytest

from conftest import small_space
from tabhpo.analysis import local_neighborhood
from tabhpo.synthetic import gen_synthetic, separable_value
from tabhpo.table import global_optimum


def test_rows_and_order(small_table):
    best, err = global_optimum(small_table)
    rows = local_neighborhood(small_table, best)
    assert len(rows) == sum(c - 1 for c in small_table.space.shape)
    assert [r.relative_change for r in rows] == sorted(r.relative_change for r in rows)
    # the optimum has no better neighbour
    assert rows[0].relative_change >= 0
    r = rows[0]
    assert r.relative_change == pytest.approx((r.error - err) / err)
    assert r.old_value != r.new_value


def test_zero_reference_error():
    sp = small_space()
    t = gen_synthetic(sp, lambda pos: pos.sum(1).astype(float), 0.0, 1, 2, 0)
    with pytest.raises(ZeroDivisionError):
        local_neighborhood(t, 0)
    rows = local_neighborhood(t, 1)
    assert any(np.isclose(r.relative_change, -1.0) for r in rows)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tabhpo.space import (CATEGORICAL, ORDINAL, ConfigSpace, DomainError, Hyperparameter,
                          decode_config, decode_many, encode_config, encode_many, n_neighbors,
                          neighbors, table2_space)


@st.composite
def spaces(draw, max_params=5, max_card=5):
    cards = draw(st.lists(st.integers(1, max_card), min_size=1, max_size=max_params))
    params = []
    for i, c in enumerate(cards):
        if draw(st.booleans()):
            params.append(Hyperparameter(f"p{i}", ORDINAL, tuple(range(c))))
        else:
            params.append(Hyperparameter(f"p{i}", CATEGORICAL, tuple(f"v{k}" for k in range(c))))
    return ConfigSpace(tuple(params))


def test_table2_cardinality():
    sp = table2_space()
    assert sp.shape == (6, 4, 2, 2, 2, 6, 6, 3, 3)
    assert sp.cardinality() == 62208


def test_first_parameter_is_most_significant():
    sp = table2_space()
    assert encode_config(sp, [1, 0, 0, 0, 0, 0, 0, 0, 0]) == 10368
    assert encode_config(sp, [0] * 8 + [1]) == 1
    assert decode_config(sp, 62207) == [c - 1 for c in sp.shape]


def test_index_order_matches_c_order_reshape():
    sp = table2_space()
    grid = np.arange(sp.cardinality()).reshape(sp.shape)
    pos = (3, 1, 0, 1, 0, 5, 2, 1, 2)
    assert grid[pos] == encode_config(sp, pos)


def test_decode_out_of_range():
    sp = table2_space()
    with pytest.raises(DomainError):
        decode_config(sp, 62208)
    with pytest.raises(DomainError):
        decode_config(sp, -1)


def test_encode_rejects_bad_positions():
    sp = table2_space()
    with pytest.raises(DomainError):
        encode_config(sp, [6, 0, 0, 0, 0, 0, 0, 0, 0])
    with pytest.raises(DomainError):
        encode_config(sp, [0, 0])


@given(spaces(), st.data())
def test_roundtrip_property(sp, data):
    i = data.draw(st.integers(0, sp.cardinality() - 1))
    assert encode_config(sp, decode_config(sp, i)) == i


@given(spaces())
@settings(max_examples=50)
def test_vectorised_matches_scalar(sp):
    idx = np.arange(sp.cardinality())
    pos = decode_many(sp, idx)
    assert [decode_config(sp, i) for i in idx] == pos.tolist()
    assert np.array_equal(encode_many(sp, pos), idx)


@given(spaces(), st.data())
def test_neighbors_differ_in_one_position(sp, data):
    i = data.draw(st.integers(0, sp.cardinality() - 1))
    nb = neighbors(sp, i)
    assert len(nb) == n_neighbors(sp) == sum(c - 1 for c in sp.shape)
    assert len(set(nb)) == len(nb) and i not in nb
    p = np.array(decode_config(sp, i))
    for j in nb:
        assert (np.array(decode_config(sp, j)) != p).sum() == 1


def test_table2_neighbor_count():
    # one-flip neighbourhood size of the nine-parameter grid
    assert n_neighbors(table2_space()) == 25
    assert len(neighbors(table2_space(), 0)) == 25


def test_values_roundtrip():
    sp = table2_space()
    v = sp.values_of(10368)
    assert v["init_lr"] == 0.001 and v["batch_size"] == 8 and v["dropout2"] == 0.0
    assert sp.index_from_values(v) == 10368
    with pytest.raises(DomainError):
        sp.index_from_values(dict(v, batch_size=7))


def test_serialisation_roundtrip():
    sp = table2_space()
    assert ConfigSpace.from_list(sp.to_list()) == sp


@pytest.mark.parametrize("kwargs", [
    dict(name="a", kind="ordinal", values=()),
    dict(name="a", kind="ordinal", values=(1, 1)),
    dict(name="a", kind="ordinal", values=(2, 1)),
    dict(name="a", kind="ordinal", values=("x", "y")),
    dict(name="a", kind="nominal", values=(1, 2)),
])
def test_hyperparameter_validation(kwargs):
    with pytest.raises(ValueError):
        Hyperparameter(**kwargs)


def test_duplicate_names_rejected():
    h = Hyperparameter("a", ORDINAL, (1, 2))
    with pytest.raises(ValueError):
        ConfigSpace((h, h))

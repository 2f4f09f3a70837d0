import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tabhpo.data import make_toy_regression, prepare_dataset
from tabhpo.mlp import MLP, Adam, TrainSpec, learning_rate, param_count, train_one


def central_diff_check(model, x, y, masks, eps=1e-6):
    _, grads = model.loss_and_grads(x, y, masks)
    worst = 0.0
    for name, p in model.params.items():
        num = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + eps
            lp, _ = model.loss_and_grads(x, y, masks)
            p[idx] = old - eps
            lm, _ = model.loss_and_grads(x, y, masks)
            p[idx] = old
            num[idx] = (lp - lm) / (2 * eps)
        denom = max(np.abs(num).max(), np.abs(grads[name]).max(), 1e-8)
        worst = max(worst, np.abs(num - grads[name]).max() / denom)
    return worst


@pytest.mark.parametrize("act1,act2", [("relu", "relu"), ("tanh", "tanh"), ("relu", "tanh")])
@pytest.mark.parametrize("dropout", [0.0, 0.3])
def test_gradient_matches_finite_differences(act1, act2, dropout):
    rng = np.random.default_rng(7)
    spec = TrainSpec(layer1_size=5, layer2_size=4, act1=act1, act2=act2, dropout1=dropout,
                     dropout2=dropout)
    model = MLP(3, spec, rng)
    # nonzero biases keep pre-activations off the relu kink even when dropout
    # silences a whole row
    for k in ("b1", "b2", "b3"):
        model.params[k] = rng.uniform(0.1, 0.5, model.params[k].shape)
    x, y = rng.standard_normal((8, 3)), rng.standard_normal(8)
    masks = model.dropout_masks(8, rng)
    assert central_diff_check(model, x, y, masks) < 1e-4


def test_param_count():
    spec = TrainSpec(layer1_size=16, layer2_size=32)
    model = MLP(9, spec, np.random.default_rng(0))
    assert model.n_params() == param_count(9, 16, 32) == 10 * 16 + 17 * 32 + 33


def test_glorot_uniform_bounds():
    model = MLP(10, TrainSpec(layer1_size=30, layer2_size=20), np.random.default_rng(0))
    assert np.abs(model.params["W1"]).max() <= math.sqrt(6 / 40)
    assert np.abs(model.params["W2"]).max() <= math.sqrt(6 / 50)
    assert not model.params["b1"].any()


def test_inverted_dropout_preserves_expectation():
    spec = TrainSpec(layer1_size=200, layer2_size=200, dropout1=0.6, dropout2=0.3)
    model = MLP(2, spec, np.random.default_rng(0))
    m1, m2 = model.dropout_masks(2000, np.random.default_rng(1))
    assert abs(m1.mean() - 1.0) < 0.02 and abs(m2.mean() - 1.0) < 0.02
    assert set(np.unique(m1)) == {0.0, 1 / 0.4}


def test_cosine_schedule():
    assert learning_rate("cosine", 0.1, 0, 10) == 0.1
    assert learning_rate("cosine", 0.1, 5, 10) == pytest.approx(0.05)
    assert learning_rate("cosine", 0.1, 10, 10) == pytest.approx(0.0, abs=1e-17)
    assert learning_rate("constant", 0.1, 7, 10) == 0.1


@settings(max_examples=30)
@given(st.integers(1, 200), st.integers(0, 199))
def test_cosine_in_range(T, e):
    lr = learning_rate("cosine", 0.01, min(e, T), T)
    assert 0.0 <= lr <= 0.01


def test_adam_first_step_moves_by_lr():
    # bias correction makes the first update lr * sign(g)
    params = {"w": np.array([1.0, -2.0])}
    Adam(params).step(params, {"w": np.array([0.5, -3.0])}, 0.1)
    assert np.allclose(params["w"], [0.9, -1.9], atol=1e-6)


def test_adam_minimises_quadratic():
    params = {"w": np.array([3.0, -4.0])}
    opt = Adam(params)
    for _ in range(2000):
        opt.step(params, {"w": 2 * params["w"]}, 0.05)
    assert np.abs(params["w"]).max() < 1e-2


def test_spec_validation():
    with pytest.raises(ValueError):
        TrainSpec(act1="gelu")
    with pytest.raises(ValueError):
        TrainSpec(dropout1=1.0)
    with pytest.raises(ValueError):
        TrainSpec(lr_schedule="step")


@pytest.fixture(scope="module")
def split():
    return prepare_dataset(make_toy_regression(200, 5, seed=0), -1, np.random.default_rng(0))


def test_training_reduces_loss(split):
    spec = TrainSpec(layer1_size=16, layer2_size=16, init_lr=0.01, batch_size=16,
                     max_epochs=15, seed=3)
    rec = train_one(split, spec, timing="model")
    assert len(rec.valid_curve) == 15 and len(rec.train_curve) == 15
    assert rec.train_curve[-1] < rec.train_curve[0]
    assert rec.final_test_mse > 0 and not rec.diverged


def test_training_is_deterministic(split):
    spec = TrainSpec(layer1_size=8, layer2_size=8, dropout1=0.3, max_epochs=4, seed=9)
    a = train_one(split, spec, timing="model")
    b = train_one(split, spec, timing="model")
    assert a == b


def test_odd_batch_remainder_kept(split):
    # 120 training rows with batch 64: a full and a partial batch, both used
    spec = TrainSpec(layer1_size=4, layer2_size=4, batch_size=64, max_epochs=2, seed=0)
    rec = train_one(split, spec, timing="model")
    assert all(np.isfinite(rec.valid_curve))


def test_divergence_is_flagged_and_carried_forward(split):
    spec = TrainSpec(layer1_size=32, layer2_size=32, init_lr=1e6, lr_schedule="constant",
                     act1="relu", act2="relu", batch_size=8, max_epochs=10, seed=1)
    rec = train_one(split, spec, timing="model")
    assert all(np.isfinite(rec.valid_curve)) and np.isfinite(rec.final_test_mse)
    if rec.diverged:
        k = next(i for i in range(9) if rec.valid_curve[i] == rec.valid_curve[-1])
        assert len(set(rec.valid_curve[k:])) == 1


def test_wall_timing_positive(split):
    rec = train_one(split, TrainSpec(layer1_size=4, layer2_size=4, max_epochs=1), timing="wall")
    assert rec.runtime_seconds > 0
    with pytest.raises(ValueError):
        train_one(split, TrainSpec(max_epochs=1), timing="cpu")

"""Two-hidden-layer regression network trained with Adam, in plain numpy."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, fields

import numpy as np

from .data import DatasetSplit
from .table import SeedRecord

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
ACTIVATIONS = ("relu", "tanh")
SCHEDULES = ("cosine", "constant")


@dataclass(frozen=True)
class TrainSpec:
    layer1_size: int = 64
    layer2_size: int = 64
    act1: str = "relu"
    act2: str = "relu"
    dropout1: float = 0.0
    dropout2: float = 0.0
    batch_size: int = 32
    init_lr: float = 0.001
    lr_schedule: str = "cosine"
    max_epochs: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.layer1_size < 1 or self.layer2_size < 1 or self.batch_size < 1:
            raise ValueError(f"layer and batch sizes must be positive: {self}")
        if self.act1 not in ACTIVATIONS or self.act2 not in ACTIVATIONS:
            raise ValueError(f"activations must be in {ACTIVATIONS}: {self}")
        if not (0 <= self.dropout1 < 1 and 0 <= self.dropout2 < 1):
            raise ValueError(f"dropout rates must lie in [0, 1): {self}")
        if self.lr_schedule not in SCHEDULES:
            raise ValueError(f"lr_schedule must be in {SCHEDULES}: {self}")
        if self.init_lr <= 0 or self.max_epochs < 1:
            raise ValueError(f"init_lr and max_epochs must be positive: {self}")


GRID_FIELDS = tuple(f.name for f in fields(TrainSpec) if f.name not in ("max_epochs", "seed"))


def param_count(n_features: int, layer1_size: int, layer2_size: int) -> int:
    return (n_features + 1) * layer1_size + (layer1_size + 1) * layer2_size + (layer2_size + 1)


def learning_rate(schedule: str, init_lr: float, epoch: int, max_epochs: int) -> float:
    """Rate for 0-based ``epoch``; cosine anneals to exactly 0 at ``epoch == max_epochs``."""
    if schedule == "constant":
        return init_lr
    if schedule == "cosine":
        return init_lr * 0.5 * (1.0 + math.cos(math.pi * epoch / max_epochs))
    raise ValueError(f"unknown schedule {schedule!r}")


def _act(name, z):
    return np.maximum(z, 0.0) if name == "relu" else np.tanh(z)


def _act_grad(name, z, a):
    return (z > 0).astype(z.dtype) if name == "relu" else 1.0 - a * a


class MLP:
    """dense(h1, act1) -> dropout -> dense(h2, act2) -> dropout -> dense(1)."""

    def __init__(self, n_features: int, spec: TrainSpec, rng: np.random.Generator):
        self.spec = spec
        sizes = [n_features, spec.layer1_size, spec.layer2_size, 1]
        self.params = {}
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:]), start=1):
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            self.params[f"W{i}"] = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            self.params[f"b{i}"] = np.zeros(fan_out)

    def n_params(self) -> int:
        return sum(p.size for p in self.params.values())

    def predict(self, x: np.ndarray) -> np.ndarray:
        p, s = self.params, self.spec
        h1 = _act(s.act1, x @ p["W1"] + p["b1"])
        h2 = _act(s.act2, h1 @ p["W2"] + p["b2"])
        return (h2 @ p["W3"] + p["b3"])[:, 0]

    def dropout_masks(self, n_rows: int, rng: np.random.Generator):
        """Inverted-dropout masks: kept units are scaled by 1/(1-p)."""
        s = self.spec
        masks = []
        for rate, width in ((s.dropout1, s.layer1_size), (s.dropout2, s.layer2_size)):
            if rate > 0:
                masks.append((rng.random((n_rows, width)) >= rate) / (1.0 - rate))
            else:
                masks.append(None)
        return masks

    def loss_and_grads(self, x: np.ndarray, y: np.ndarray, masks=(None, None)):
        """Mean squared error of a batch and its gradient w.r.t. every parameter."""
        p, s = self.params, self.spec
        z1 = x @ p["W1"] + p["b1"]
        a1 = _act(s.act1, z1)
        d1 = a1 if masks[0] is None else a1 * masks[0]
        z2 = d1 @ p["W2"] + p["b2"]
        a2 = _act(s.act2, z2)
        d2 = a2 if masks[1] is None else a2 * masks[1]
        out = (d2 @ p["W3"] + p["b3"])[:, 0]
        resid = out - y
        loss = float(np.mean(resid * resid))

        g_out = (2.0 / len(y)) * resid[:, None]
        grads = {"W3": d2.T @ g_out, "b3": g_out.sum(axis=0)}
        g = g_out @ p["W3"].T
        if masks[1] is not None:
            g = g * masks[1]
        g = g * _act_grad(s.act2, z2, a2)
        grads["W2"], grads["b2"] = d1.T @ g, g.sum(axis=0)
        g = g @ p["W2"].T
        if masks[0] is not None:
            g = g * masks[0]
        g = g * _act_grad(s.act1, z1, a1)
        grads["W1"], grads["b1"] = x.T @ g, g.sum(axis=0)
        return loss, grads


class Adam:
    def __init__(self, params: dict):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict, lr: float) -> None:
        self.t += 1
        c1 = 1.0 - ADAM_BETA1 ** self.t
        c2 = 1.0 - ADAM_BETA2 ** self.t
        for k, g in grads.items():
            m, v = self.m[k], self.v[k]
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * g * g
            params[k] -= lr * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)


def _mse(model: MLP, x: np.ndarray, y: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        r = model.predict(x) - y
        return float(np.mean(r * r))


def modeled_runtime(n_params: int, n_train: int, batch_size: int, max_epochs: int) -> float:
    """Deterministic stand-in for wall-clock: multiply-adds plus per-step overhead."""
    steps = math.ceil(n_train / batch_size)
    return max_epochs * (6e-9 * n_params * n_train + 2e-5 * steps) + 1e-3


def train_one(split: DatasetSplit, spec: TrainSpec, timing: str = "wall") -> SeedRecord:
    """Train one network and record its per-epoch learning curves.

    If the loss turns non-finite, training stops; the remaining epochs repeat
    the last finite curve values and the record is flagged ``diverged``.
    ``timing="model"`` replaces the measured runtime by :func:`modeled_runtime`.
    """
    rng = np.random.default_rng(spec.seed)
    model = MLP(split.n_features, spec, rng)
    opt = Adam(model.params)
    x, y = split.train_x, split.train_y
    n = len(y)
    epochs = spec.max_epochs

    last = {k: v.copy() for k, v in model.params.items()}
    train_curve, valid_curve = [], []
    last_train, last_valid = _mse(model, x, y), _mse(model, split.valid_x, split.valid_y)
    diverged = not (np.isfinite(last_train) and np.isfinite(last_valid))

    start = time.perf_counter()
    for epoch in range(epochs):
        if diverged:
            train_curve.append(last_train)
            valid_curve.append(last_valid)
            continue
        lr = learning_rate(spec.lr_schedule, spec.init_lr, epoch, epochs)
        order = rng.permutation(n)
        with np.errstate(over="ignore", invalid="ignore"):
            for lo in range(0, n, spec.batch_size):
                idx = order[lo:lo + spec.batch_size]
                masks = model.dropout_masks(len(idx), rng)
                loss, grads = model.loss_and_grads(x[idx], y[idx], masks)
                if not np.isfinite(loss):
                    diverged = True
                    break
                opt.step(model.params, grads, lr)
        tr = _mse(model, x, y)
        va = _mse(model, split.valid_x, split.valid_y)
        if diverged or not (np.isfinite(tr) and np.isfinite(va)):
            diverged = True
            model.params = last
        else:
            last_train, last_valid = tr, va
            last = {k: v.copy() for k, v in model.params.items()}
        train_curve.append(last_train)
        valid_curve.append(last_valid)
    elapsed = time.perf_counter() - start

    test_mse = _mse(model, split.test_x, split.test_y)
    if not np.isfinite(test_mse):
        test_mse, diverged = last_valid, True
    n_params = param_count(split.n_features, spec.layer1_size, spec.layer2_size)
    if timing == "model":
        runtime = modeled_runtime(n_params, n, spec.batch_size, epochs)
    elif timing == "wall":
        runtime = max(elapsed, 1e-9)
    else:
        raise ValueError(f"unknown timing mode {timing!r}")
    return SeedRecord(
        seed=int(spec.seed),
        train_curve=train_curve,
        valid_curve=valid_curve,
        final_test_mse=test_mse,
        runtime_seconds=float(runtime),
        n_params=n_params,
        diverged=diverged,
    )

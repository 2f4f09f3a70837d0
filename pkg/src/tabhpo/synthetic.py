"""Synthetic tables with known structure, for oracle tests and optimizer studies.

``value_fn`` and ``noise_fn`` are vectorised: they receive the
``(n_cells, n_params)`` array of value positions and return one number per
cell (or a scalar).
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .mlp import param_count
from .space import ConfigSpace
from .table import BenchTable

ValueFn = Callable[[np.ndarray], np.ndarray]


def decay(max_epochs: int, scale: float = 1.0) -> np.ndarray:
    """Relative excess error after each epoch; exactly 0 at the final epoch."""
    frac = np.arange(1, max_epochs + 1) / max_epochs
    return scale * (1.0 - frac) ** 2


def noise_shrink(max_epochs: int) -> np.ndarray:
    """Multiplier on the per-seed noise scale; 3 at epoch 0 falling to 1 at the end."""
    frac = np.arange(1, max_epochs + 1) / max_epochs
    return 1.0 + 2.0 * (1.0 - frac)


def default_runtime(n_params: np.ndarray) -> np.ndarray:
    return 20.0 + 2e-3 * np.asarray(n_params, dtype=np.float64)


def architecture_sizes(space: ConfigSpace, positions: np.ndarray, n_features: int) -> np.ndarray:
    """Parameter counts per cell when the space names layer sizes, else 1."""
    sizes = []
    for name in ("layer1_size", "layer2_size"):
        if name in space.names:
            j = space.index_of(name)
            sizes.append(np.asarray(space.params[j].values, dtype=np.int64)[positions[:, j]])
        else:
            sizes.append(None)
    if sizes[0] is None and sizes[1] is None:
        return np.ones(len(positions), dtype=np.int64)
    h1 = sizes[0] if sizes[0] is not None else np.full(len(positions), 64)
    h2 = sizes[1] if sizes[1] is not None else np.full(len(positions), 64)
    return param_count(n_features, h1, h2).astype(np.int64)


def gen_synthetic(space: ConfigSpace, value_fn: ValueFn, noise_fn: ValueFn | float,
                  n_seeds: int, max_epochs: int, seed: int, decay_scale: float = 1.0,
                  n_features: int = 9, runtime_fn=default_runtime,
                  dataset_name: str = "synthetic") -> BenchTable:
    """Fabricate a table whose per-cell mean error is ``value_fn``.

    Validation curves follow ``value * (1 + decay(t))`` plus gaussian noise of
    scale ``noise * noise_shrink(t)``; the final test error is ``value`` plus
    independent noise of scale ``noise``. Errors are folded at zero so they
    stay valid MSEs. Runtime is a deterministic function of the architecture.
    """
    rng = np.random.default_rng(seed)
    pos = space.all_positions()
    n = len(pos)
    value = np.broadcast_to(np.asarray(value_fn(pos), dtype=np.float64), (n,))
    noise = noise_fn(pos) if callable(noise_fn) else noise_fn
    noise = np.broadcast_to(np.asarray(noise, dtype=np.float64), (n,))
    if not np.isfinite(value).all():
        raise ValueError("value_fn returned non-finite values")
    if not np.isfinite(noise).all() or (noise < 0).any():
        raise ValueError("noise_fn must return finite, non-negative scales")

    mean_curve = value[:, None] * (1.0 + decay(max_epochs, decay_scale))[None, :]
    scale = noise[:, None] * noise_shrink(max_epochs)[None, :]
    valid = np.empty((n, n_seeds, max_epochs))
    train = np.empty((n, n_seeds, max_epochs))
    test = np.empty((n, n_seeds))
    for k in range(n_seeds):
        valid[:, k] = np.abs(mean_curve + scale * rng.standard_normal((n, max_epochs)))
        train[:, k] = np.abs(0.9 * mean_curve + 0.5 * scale * rng.standard_normal((n, max_epochs)))
        test[:, k] = np.abs(value + noise * rng.standard_normal(n))

    n_params = architecture_sizes(space, pos, n_features)
    runtime = np.repeat(np.asarray(runtime_fn(n_params), dtype=np.float64)[:, None], n_seeds, 1)
    seeds = np.tile(np.arange(n_seeds, dtype=np.int64), (n, 1))
    return BenchTable(space, max_epochs, dataset_name, train, valid, test, runtime, n_params, seeds)


# -- value-function presets --------------------------------------------------

def separable_value(space: ConfigSpace, seed: int = 0, base: float = 0.1) -> ValueFn:
    """Additive bowl: each parameter contributes a weighted squared distance to a
    randomly placed optimal position (distance measured on the [0, 1] position scale)."""
    rng = np.random.default_rng(seed)
    card = np.array(space.shape)
    best = rng.integers(0, card)
    weights = rng.uniform(0.2, 1.0, size=space.ndim)

    def f(pos):
        span = np.maximum(card - 1, 1)
        d = (pos - best) / span
        return base + (weights * d * d).sum(axis=-1)

    f.optimum = best
    return f


def interaction_value(space: ConfigSpace, seed: int = 0, strength: float = 0.5) -> ValueFn:
    """Separable bowl plus a product interaction between the first two parameters."""
    sep = separable_value(space, seed)
    card = np.array(space.shape)

    def f(pos):
        u = pos[:, :2] / np.maximum(card[:2] - 1, 1)
        return sep(pos) + strength * u[:, 0] * u[:, 1]

    return f


def permutation_value(space: ConfigSpace, seed: int = 0) -> ValueFn:
    """Distinct values 1..N (scaled) assigned to cells in random order; no structure."""
    n = space.cardinality()
    vals = (np.random.default_rng(seed).permutation(n) + 1.0) / n

    def f(pos):
        return vals[pos @ space.strides]

    return f


def heteroscedastic_noise(space: ConfigSpace, level: float = 0.05, seed: int = 0) -> ValueFn:
    """Per-cell noise scale proportional to a fixed random factor in [0.5, 1.5)."""
    factor = 0.5 + np.random.default_rng(seed).random(space.cardinality())

    def g(pos):
        return level * factor[pos @ space.strides]

    return g


PRESETS = {
    "separable": separable_value,
    "interaction": interaction_value,
    "permutation": permutation_value,
}

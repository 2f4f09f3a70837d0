"""SMAC-style Bayesian optimisation with a random-forest surrogate."""

from __future__ import annotations

from collections import defaultdict

import numpy as np
from scipy.special import ndtr

from ..space import ConfigSpace, decode_many
from .base import Observation, Optimizer, Suggestion
from .forest import RandomForest


def expected_improvement(mean: np.ndarray, var: np.ndarray, best: float) -> np.ndarray:
    """EI for minimisation below ``best``; reduces to ``max(best - mean, 0)`` at zero variance."""
    mean = np.asarray(mean, dtype=np.float64)
    sd = np.sqrt(np.maximum(var, 0.0))
    imp = best - mean
    ei = np.maximum(imp, 0.0)
    pos = sd > 0
    z = imp[pos] / sd[pos]
    ei[pos] = imp[pos] * ndtr(z) + sd[pos] * np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
    return np.maximum(ei, 0.0)


class LocalSearch:
    """Steepest-ascent hill climbing over one-flip neighbourhoods.

    From each start, move to the neighbour with the highest acquisition as
    long as it strictly improves on the current cell. Cells for which
    ``acq`` returns ``-inf`` are never entered.
    """

    def __init__(self, space: ConfigSpace):
        self.space = space
        self.strides = space.strides
        self.cards = np.array(space.shape)

    def neighbours(self, configs: np.ndarray) -> np.ndarray:
        """(k, sum(cards)) candidate matrix; each row holds ``configs[i]`` itself once per
        parameter at the position of its current value."""
        pos = decode_many(self.space, configs)
        cols = []
        for j, c in enumerate(self.cards):
            base = configs - pos[:, j] * self.strides[j]
            cols.append(base[:, None] + np.arange(c)[None, :] * self.strides[j])
        return np.concatenate(cols, axis=1)

    def run(self, starts: np.ndarray, acq) -> tuple[np.ndarray, np.ndarray, int]:
        """Climb from every start; returns end cells, their acquisition, and steps taken."""
        current = np.asarray(starts, dtype=np.int64).copy()
        value = acq(current)
        active = np.ones(len(current), dtype=bool)
        steps = 0
        limit = int(np.prod(self.cards))
        while active.any() and steps < limit:
            idx = np.flatnonzero(active)
            nb = self.neighbours(current[idx])
            vals = acq(nb.ravel()).reshape(nb.shape)
            vals[nb == current[idx][:, None]] = -np.inf
            # highest acquisition, then lowest index
            best_val = vals.max(axis=1)
            masked = np.where(vals == best_val[:, None], nb, np.iinfo(np.int64).max)
            best_cell = masked.min(axis=1)
            move = best_val > value[idx]
            current[idx[move]] = best_cell[move]
            value[idx[move]] = best_val[move]
            active[idx[~move]] = False
            steps += 1
        return current, value, steps


class RFBO(Optimizer):
    """Random-forest surrogate, expected improvement, local-search acquisition.

    Every ``random_interleave``-th suggestion is uniform random, configs with
    ``max_evals_per_config`` observations are never suggested again, and
    the EI threshold is the best observed per-config mean error.
    """

    name = "rfbo"

    def __init__(self, space: ConfigSpace, max_epochs: int, rng: np.random.Generator,
                 n_trees: int = 10, max_evals_per_config: int = 4, random_interleave: int = 3,
                 n_local_starts: int = 10):
        super().__init__(space, max_epochs, rng)
        self.forest = RandomForest(space.shape, n_trees=n_trees)
        self.max_evals_per_config = max_evals_per_config
        self.random_interleave = random_interleave
        self.n_local_starts = n_local_starts
        self.search = LocalSearch(space)
        self.configs: list = []
        self.losses: list = []
        self.counts = defaultdict(int)
        self.sums = defaultdict(float)
        self.n_suggested = 0
        self.n_saturated = 0
        self.last_source = None

    def is_saturated(self, config: int) -> bool:
        return self.counts.get(config, 0) >= self.max_evals_per_config

    def random_unsaturated(self) -> int | None:
        """Uniform draw among unsaturated cells; ``None`` once every cell is saturated."""
        if self.n_saturated >= self.n_cells:
            return None
        if self.n_saturated <= self.n_cells // 2:
            while True:
                c = self.random_config()
                if not self.is_saturated(c):
                    return c
        free = np.setdiff1d(np.arange(self.n_cells),
                            [c for c in self.counts if self.is_saturated(c)])
        return int(free[self.rng.integers(len(free))])

    def _random(self) -> Suggestion | None:
        self.last_source = "random"
        c = self.random_unsaturated()
        return None if c is None else Suggestion(c, self.max_epochs)

    def best_observed(self) -> float:
        return min(self.sums[c] / self.counts[c] for c in self.counts)

    def acquisition(self):
        """Fit the surrogate and return an EI function over config indices."""
        X = decode_many(self.space, np.asarray(self.configs))
        seed = int(self.rng.integers(2**31 - 1))
        self.forest.fit(X, np.asarray(self.losses), seed)
        best = self.best_observed()
        saturated = np.array([c for c in self.counts if self.is_saturated(c)], dtype=np.int64)

        def acq(cells):
            cells = np.asarray(cells, dtype=np.int64)
            mean, var = self.forest.predict(decode_many(self.space, cells))
            ei = expected_improvement(mean, var, best)
            if len(saturated):
                ei[np.isin(cells, saturated)] = -np.inf
            return ei

        return acq

    def suggest(self) -> Suggestion | None:
        self.n_suggested += 1
        if self.n_saturated >= self.n_cells:
            return None
        if (len(self.configs) < 2 or self.n_suggested % self.random_interleave == 0):
            return self._random()
        acq = self.acquisition()
        starts = self.rng.integers(self.n_cells, size=self.n_local_starts)
        ends, vals, _ = self.search.run(starts, acq)
        top = vals.max()
        if not top > 0:
            return self._random()
        self.last_source = "model"
        return Suggestion(int(ends[vals == top].min()), self.max_epochs)

    def observe(self, obs: Observation) -> None:
        self.configs.append(obs.config)
        self.losses.append(obs.valid_mse)
        self.counts[obs.config] += 1
        if self.counts[obs.config] == self.max_evals_per_config:
            self.n_saturated += 1
        self.sums[obs.config] += obs.valid_mse

"""Tree Parzen estimator with independent per-dimension kernel densities."""

from __future__ import annotations

import math

import numpy as np

from ..space import ConfigSpace, decode_many, encode_many
from .base import Observation, Optimizer, Suggestion
from .kde import IndependentKDE, SpaceKernels, rank_order, univariate_mlcv_bandwidths


class TPE(Optimizer):
    """Good/bad split at the ``gamma`` quantile, one univariate density per side and
    dimension, candidates drawn from the good density, argmax of the density ratio.

    The first ``n_startup`` suggestions are uniform. Each marginal mixes in a
    uniform pseudo-observation of weight ``prior_weight``, and bandwidths are
    floored at ``min_bandwidth`` so the good density never collapses onto a
    single cell.
    """

    name = "tpe"

    def __init__(self, space: ConfigSpace, max_epochs: int, rng: np.random.Generator,
                 gamma: float = 0.25, n_candidates: int = 24, min_bandwidth: float = 0.3,
                 prior_weight: float = 1.0, n_startup: int = 20):
        super().__init__(space, max_epochs, rng)
        self.prior_weight = prior_weight
        self.n_startup = n_startup
        self.gamma = gamma
        self.n_candidates = n_candidates
        self.min_bandwidth = min_bandwidth
        self.kernels = SpaceKernels(space)
        self.configs: list = []
        self.losses: list = []

    def split_sizes(self) -> tuple[int, int]:
        n = len(self.losses)
        n_good = math.ceil(self.gamma * n)
        return n_good, n - n_good

    def fit_model(self) -> tuple[IndependentKDE, IndependentKDE]:
        n_good, _ = self.split_sizes()
        order = rank_order(self.losses)
        pos = decode_many(self.space, np.asarray(self.configs))
        good, bad = pos[order[:n_good]], pos[order[n_good:]]
        models = []
        for data in (good, bad):
            bw = self.kernels.clip(univariate_mlcv_bandwidths(self.kernels, data),
                                   self.min_bandwidth)
            models.append(IndependentKDE(self.kernels, data, bw, self.prior_weight))
        return models[0], models[1]

    def suggest(self) -> Suggestion:
        n_good, n_bad = self.split_sizes()
        if len(self.losses) < self.n_startup or n_good < 2 or n_bad < 2:
            return Suggestion(self.random_config(), self.max_epochs)
        good, bad = self.fit_model()
        cand = good.sample(self.rng, self.n_candidates)
        score = np.maximum(good.pdf(cand), 1e-32) / np.maximum(bad.pdf(cand), 1e-32)
        idx = encode_many(self.space, cand)
        best = np.flatnonzero(score == score.max())
        return Suggestion(int(idx[best].min()), self.max_epochs)

    def observe(self, obs: Observation) -> None:
        self.configs.append(obs.config)
        self.losses.append(obs.valid_mse)

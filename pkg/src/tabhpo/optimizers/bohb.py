"""BOHB: Hyperband whose new configurations come from a good/bad density ratio."""

from __future__ import annotations

import numpy as np

from ..space import ConfigSpace, decode_many, encode_many
from .base import Observation
from .hyperband import Hyperband
from .kde import ProductKDE, SpaceKernels, mlcv_bandwidths, rank_order


class BOHB(Hyperband):
    name = "bohb"

    def __init__(self, space: ConfigSpace, max_epochs: int, rng: np.random.Generator,
                 eta: float = 3, min_budget: int = 4, max_budget: int | None = None,
                 max_sh_iterations: int = 125, gamma: float = 0.15,
                 min_points_in_model: int | None = None, random_fraction: float = 1 / 3,
                 n_samples: int = 64, bandwidth_factor: float = 3.0,
                 min_bandwidth: float = 0.3):
        super().__init__(space, max_epochs, rng, eta, min_budget, max_budget, max_sh_iterations)
        self.gamma = gamma
        self.min_points = space.ndim + 2 if min_points_in_model is None else min_points_in_model
        self.random_fraction = random_fraction
        self.n_samples = n_samples
        self.bandwidth_factor = bandwidth_factor
        self.min_bandwidth = min_bandwidth
        self.kernels = SpaceKernels(space)
        self.history: dict = {}  # budget -> (list of configs, list of losses)
        self._models: dict = {}
        self.model_suggestions = 0

    def record(self, obs: Observation) -> None:
        configs, losses = self.history.setdefault(obs.budget_epochs, ([], []))
        configs.append(obs.config)
        losses.append(obs.valid_mse)

    def model_budget(self) -> int | None:
        """Largest budget with enough observations to fit both densities."""
        fit = [b for b, (c, _) in self.history.items() if len(c) >= self.min_points + 2]
        return max(fit) if fit else None

    def fit_model(self, budget: int) -> tuple[ProductKDE, ProductKDE]:
        configs, losses = self.history[budget]
        key = (budget, len(configs))
        if key in self._models:
            return self._models[key]
        n = len(configs)
        order = rank_order(losses)
        n_good = max(self.min_points, int(self.gamma * n))
        n_bad = max(self.min_points, int((1 - self.gamma) * n))
        pos = decode_many(self.space, np.asarray(configs))
        good, bad = pos[order[:n_good]], pos[order[n_good:n_good + n_bad]]
        bw_good = self.kernels.clip(mlcv_bandwidths(self.kernels, good), self.min_bandwidth)
        bw_bad = self.kernels.clip(mlcv_bandwidths(self.kernels, bad), self.min_bandwidth)
        model = (ProductKDE(self.kernels, good, bw_good), ProductKDE(self.kernels, bad, bw_bad))
        self._models = {key: model}
        return model

    def sample_from_model(self, good: ProductKDE, bad: ProductKDE) -> int:
        """Best of ``n_samples`` draws from the widened good density by ``l / g``."""
        cand = good.sample(self.rng, self.n_samples, self.bandwidth_factor, self.min_bandwidth)
        score = np.maximum(good.pdf(cand), 1e-32) / np.maximum(bad.pdf(cand), 1e-32)
        idx = encode_many(self.space, cand)
        best = np.flatnonzero(score == score.max())
        return int(idx[best].min())

    def new_config(self, budget: int) -> int:
        b = self.model_budget()
        if b is None or self.rng.random() < self.random_fraction:
            return self.random_config()
        self.model_suggestions += 1
        return self.sample_from_model(*self.fit_model(b))


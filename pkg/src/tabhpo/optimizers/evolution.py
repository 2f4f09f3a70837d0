"""Regularized (aging) evolution."""

from __future__ import annotations

from collections import deque

import numpy as np

from ..space import ConfigSpace, decode_config, encode_config
from .base import Observation, Optimizer, Suggestion


def mutate(space: ConfigSpace, config: int, rng: np.random.Generator) -> int:
    """Change one uniformly chosen parameter to a different uniformly chosen value.

    Parameters with a single value cannot change and are never picked; a space
    with no mutable parameter returns ``config`` unchanged.
    """
    mutable = [j for j, c in enumerate(space.shape) if c > 1]
    if not mutable:
        return config
    pos = decode_config(space, config)
    j = mutable[int(rng.integers(len(mutable)))]
    new = int(rng.integers(space.shape[j] - 1))
    pos[j] = new if new < pos[j] else new + 1
    return encode_config(space, pos)


class RegularizedEvolution(Optimizer):
    """Tournament selection, single-parameter mutation, oldest member evicted."""

    name = "re"

    def __init__(self, space: ConfigSpace, max_epochs: int, rng: np.random.Generator,
                 population_size: int = 100, tournament_size: int = 10):
        super().__init__(space, max_epochs, rng)
        self.population_size = population_size
        self.tournament_size = tournament_size
        self.population: deque = deque(maxlen=population_size)  # (config, valid error)
        self.n_suggested = 0

    def select_parent(self) -> int:
        k = min(self.tournament_size, len(self.population))
        picks = self.rng.choice(len(self.population), size=k, replace=False)
        members = [self.population[i] for i in picks]
        return min(members, key=lambda m: (m[1], m[0]))[0]

    def suggest(self) -> Suggestion:
        self.n_suggested += 1
        if self.n_suggested <= self.population_size:
            return Suggestion(self.random_config(), self.max_epochs)
        parent = self.select_parent()
        return Suggestion(mutate(self.space, parent, self.rng), self.max_epochs)

    def observe(self, obs: Observation) -> None:
        self.population.append((obs.config, obs.valid_mse))

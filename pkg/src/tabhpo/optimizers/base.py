from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..space import ConfigSpace


@dataclass(frozen=True)
class Suggestion:
    config: int
    budget_epochs: int


@dataclass(frozen=True)
class Observation:
    config: int
    budget_epochs: int
    valid_mse: float
    runtime_charged_seconds: float


class Optimizer:
    """Sequential suggest/observe strategy over the cells of a configuration space.

    ``suggest`` returns ``None`` once the strategy has exhausted its own
    iteration budget. Every call to ``suggest`` is followed by exactly one
    ``observe`` of that suggestion.
    """

    name = "base"

    def __init__(self, space: ConfigSpace, max_epochs: int, rng: np.random.Generator):
        self.space = space
        self.max_epochs = int(max_epochs)
        self.rng = rng
        self.n_cells = space.cardinality()

    def suggest(self) -> Suggestion | None:
        raise NotImplementedError

    def observe(self, obs: Observation) -> None:
        raise NotImplementedError

    def random_config(self) -> int:
        return int(self.rng.integers(self.n_cells))

    def random_positions(self, n: int) -> np.ndarray:
        return self.rng.integers(0, np.array(self.space.shape), size=(n, self.space.ndim))

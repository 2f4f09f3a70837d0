"""HPO strategies behind a common suggest/observe interface."""

from __future__ import annotations

import numpy as np

from ..space import ConfigSpace
from .base import Observation, Optimizer, Suggestion
from .bohb import BOHB
from .evolution import RegularizedEvolution
from .hyperband import Hyperband, Schedule, hb_schedule
from .random_search import RandomSearch
from .reinforce import Reinforce
from .rfbo import RFBO
from .tpe import TPE

STRATEGIES = {
    "rs": RandomSearch,
    "tpe": TPE,
    "rfbo": RFBO,
    "re": RegularizedEvolution,
    "hb": Hyperband,
    "bohb": BOHB,
    "rl": Reinforce,
}


def make_optimizer(name: str, space: ConfigSpace, max_epochs: int, rng: np.random.Generator,
                   **params) -> Optimizer:
    try:
        cls = STRATEGIES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; available: {', '.join(STRATEGIES)}") from None
    return cls(space, max_epochs, rng, **params)


__all__ = [
    "BOHB", "Hyperband", "Observation", "Optimizer", "RFBO", "RandomSearch",
    "RegularizedEvolution", "Reinforce", "STRATEGIES", "Schedule", "Suggestion", "TPE",
    "hb_schedule", "make_optimizer",
]

from __future__ import annotations

from .base import Observation, Optimizer, Suggestion


class RandomSearch(Optimizer):
    """Uniform sampling over all grid cells at the full budget."""

    name = "rs"

    def suggest(self) -> Suggestion:
        return Suggestion(self.random_config(), self.max_epochs)

    def observe(self, obs: Observation) -> None:
        pass

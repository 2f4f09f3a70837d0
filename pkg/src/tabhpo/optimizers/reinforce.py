"""REINFORCE over independent categorical distributions, one per parameter."""

from __future__ import annotations

import numpy as np

from ..space import ConfigSpace, decode_config, encode_config
from .base import Observation, Optimizer, Suggestion


def softmax(logits: np.ndarray) -> np.ndarray:
    e = np.exp(logits - logits.max())
    return e / e.sum()


class Reinforce(Optimizer):
    """Policy-gradient search with an exponential-moving-average reward baseline.

    The reward of an observation is its negated validation error.
    """

    name = "rl"

    def __init__(self, space: ConfigSpace, max_epochs: int, rng: np.random.Generator,
                 learning_rate: float = 0.1, baseline_momentum: float = 0.9):
        super().__init__(space, max_epochs, rng)
        self.learning_rate = learning_rate
        self.momentum = baseline_momentum
        self.logits = [np.zeros(c) for c in space.shape]
        self.baseline = None

    def probabilities(self) -> list[np.ndarray]:
        return [softmax(l) for l in self.logits]

    def suggest(self) -> Suggestion:
        pos = []
        for p in self.probabilities():
            u = self.rng.random()
            pos.append(min(int(np.searchsorted(np.cumsum(p), u * p.sum(), side="right")),
                           len(p) - 1))
        return Suggestion(encode_config(self.space, pos), self.max_epochs)

    def update(self, config: int, reward: float) -> None:
        if self.baseline is None:
            self.baseline = reward
        self.baseline = self.momentum * self.baseline + (1 - self.momentum) * reward
        advantage = reward - self.baseline
        for logits, k in zip(self.logits, decode_config(self.space, config)):
            # d log softmax(l)[k] / dl = onehot(k) - softmax(l)
            grad = -softmax(logits)
            grad[k] += 1.0
            logits += self.learning_rate * advantage * grad

    def observe(self, obs: Observation) -> None:
        self.update(obs.config, -obs.valid_mse)

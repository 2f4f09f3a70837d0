"""Hyperband: cycles of successive-halving brackets over epoch budgets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..space import ConfigSpace
from .base import Observation, Optimizer, Suggestion


@dataclass(frozen=True)
class Schedule:
    budgets: tuple  # geometric budget ladder, ascending
    brackets: tuple  # per bracket, a tuple of (n_configs, budget) rungs

    def cycle_cost(self) -> int:
        """Total epochs trained in one pass over all brackets."""
        return sum(n * b for bracket in self.brackets for n, b in bracket)

    def cycle_evaluations(self) -> int:
        return sum(n for bracket in self.brackets for n, _ in bracket)


def _round_half_up(x: float) -> int:
    return max(1, math.floor(x + 0.5))


def hb_schedule(eta: float, b_min: float, b_max: float) -> Schedule:
    """Budget ladder and bracket layout; brackets run from most to least aggressive.

    ``s_max = floor(log_eta(b_max / b_min))``; bracket ``s`` starts
    ``ceil((s_max + 1) / (s + 1)) * eta**s`` configs at ladder index
    ``s_max - s`` and each rung keeps ``floor(n / eta)``.
    """
    if not eta > 1:
        raise ValueError(f"eta must exceed 1, got {eta}")
    if not 0 < b_min <= b_max:
        raise ValueError(f"need 0 < b_min <= b_max, got {b_min}, {b_max}")
    ratio = b_max / b_min
    s_max = 0
    while eta ** (s_max + 1) <= ratio * (1 + 1e-12):
        s_max += 1
    budgets = tuple(_round_half_up(b_max * eta ** (-(s_max - i))) for i in range(s_max + 1))
    brackets = []
    for s in range(s_max, -1, -1):
        n = int(math.ceil((s_max + 1) / (s + 1)) * eta ** s)
        rungs = []
        for i in range(s + 1):
            rungs.append((n, budgets[s_max - s + i]))
            n = int(n // eta)
        brackets.append(tuple(rungs))
    return Schedule(budgets, tuple(brackets))


def promote(configs: list, losses: list, k: int) -> list:
    """The ``k`` configs with the lowest losses; ties go to the lower config index."""
    order = sorted(range(len(configs)), key=lambda i: (losses[i], configs[i], i))
    return [configs[i] for i in order[:k]]


class Hyperband(Optimizer):
    """Synchronous Hyperband over the table's epoch budgets.

    ``max_sh_iterations`` counts successive-halving runs (bracket executions);
    once that many have finished, :meth:`suggest` returns ``None``.
    """

    name = "hb"

    def __init__(self, space: ConfigSpace, max_epochs: int, rng: np.random.Generator,
                 eta: float = 3, min_budget: int = 4, max_budget: int | None = None,
                 max_sh_iterations: int = 125):
        super().__init__(space, max_epochs, rng)
        max_budget = max_epochs if max_budget is None else max_budget
        if max_budget > max_epochs:
            raise ValueError(f"max_budget {max_budget} exceeds the table's {max_epochs} epochs")
        self.eta = eta
        self.schedule = hb_schedule(eta, min(min_budget, max_budget), max_budget)
        self.max_sh_iterations = max_sh_iterations
        self.sh_iterations_started = 0
        self.sh_iterations_done = 0
        self._bracket = None  # index into schedule.brackets
        self._rung = 0
        self._configs: list = []
        self._losses: list = []
        self._cursor = 0

    @property
    def budgets(self) -> tuple:
        return self.schedule.budgets

    def _start_bracket(self) -> bool:
        if self.sh_iterations_started >= self.max_sh_iterations:
            return False
        self._bracket = self.sh_iterations_started % len(self.schedule.brackets)
        self.sh_iterations_started += 1
        self._rung = 0
        self._configs, self._losses, self._cursor = [], [], 0
        return True

    def _rung_spec(self) -> tuple[int, int]:
        return self.schedule.brackets[self._bracket][self._rung]

    def new_config(self, budget: int) -> int:
        """Config for a bracket's first rung; model-based subclasses override this."""
        return self.random_config()

    def suggest(self) -> Suggestion | None:
        if self._bracket is None and not self._start_bracket():
            return None
        n, budget = self._rung_spec()
        if self._cursor >= n:
            raise RuntimeError("suggest called before the previous suggestion was observed")
        if self._rung == 0 and self._cursor == len(self._configs):
            self._configs.append(self.new_config(budget))
        config = self._configs[self._cursor]
        self._cursor += 1
        return Suggestion(config, budget)

    def observe(self, obs: Observation) -> None:
        self.record(obs)
        self._losses.append(obs.valid_mse)
        n, _ = self._rung_spec()
        if len(self._losses) < n:
            return
        bracket = self.schedule.brackets[self._bracket]
        if self._rung + 1 < len(bracket):
            keep = bracket[self._rung + 1][0]
            self._configs = promote(self._configs, self._losses, keep)
            self._losses, self._cursor = [], 0
            self._rung += 1
        else:
            self.sh_iterations_done += 1
            self._bracket = None

    def record(self, obs: Observation) -> None:
        """Hook for subclasses that learn from every observation."""

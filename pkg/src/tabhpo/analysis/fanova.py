"""Exact functional ANOVA on a complete factorial grid.

Because the table covers every cell, the marginal means that define the
functional ANOVA components are plain averages over grid axes; no surrogate
model or sampling is involved. Every cell carries equal weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..space import ConfigSpace
from ..table import BenchTable, metric_vector


@dataclass
class Decomposition:
    total_variance: float
    variances: dict  # frozenset of parameter indices -> variance of that component
    names: list
    max_order: int
    degenerate: bool = False
    clamp_value: float | None = None
    components: dict = field(default_factory=dict, repr=False)

    def fraction(self, subset) -> float:
        if self.degenerate:
            return 0.0
        return self.variances[frozenset(subset)] / self.total_variance

    @property
    def fractions(self) -> dict:
        return {u: self.fraction(u) for u in self.variances}

    def unary(self) -> list[tuple[str, float]]:
        return [(self.names[i], self.fraction({i})) for i in range(len(self.names))]

    def label(self, subset) -> str:
        return " x ".join(self.names[i] for i in sorted(subset))


def clamp_at_quantile(y: np.ndarray, p: float) -> tuple[np.ndarray, float]:
    """Replace values above the ``p``-quantile by the quantile itself."""
    if not 0 < p <= 1:
        raise ValueError(f"percentile clamp {p} outside (0, 1]")
    q = float(np.quantile(y, p))
    return np.minimum(y, q), q


def fanova_grid(values: np.ndarray, names=None, max_order: int | None = None,
                percentile_clamp: float | None = None,
                keep_components: bool = False) -> Decomposition:
    """Decompose an array indexed by per-parameter value positions.

    ``values`` has one axis per parameter. Components up to ``max_order`` are
    computed by Moebius subtraction of lower-order components from the
    marginal means.
    """
    y = np.asarray(values, dtype=np.float64)
    d = y.ndim
    names = list(names) if names is not None else [f"x{i}" for i in range(d)]
    max_order = d if max_order is None else max_order
    if not 0 <= max_order <= d:
        raise ValueError(f"max_order {max_order} outside [0, {d}]")
    if not np.isfinite(y).all():
        raise ValueError("fanova needs finite values on every grid cell")
    clamp = None
    if percentile_clamp is not None:
        y, clamp = clamp_at_quantile(y, percentile_clamp)

    grand = float(y.mean())
    total = float(((y - grand) ** 2).mean())
    comps = {frozenset(): np.full((1,) * d, grand)}
    variances = {}
    axes = tuple(range(d))
    for order in range(1, max_order + 1):
        for subset in combinations(axes, order):
            other = tuple(a for a in axes if a not in subset)
            f = y.mean(axis=other, keepdims=True) if other else y.copy()
            for k in range(order):
                for sub in combinations(subset, k):
                    f = f - comps[frozenset(sub)]
            key = frozenset(subset)
            comps[key] = f
            # f broadcasts over the axes outside the subset, so its own mean is the grid mean
            variances[key] = float(np.mean(f * f))
    return Decomposition(
        total_variance=total,
        variances=variances,
        names=names,
        max_order=max_order,
        degenerate=total == 0.0,
        clamp_value=clamp,
        components=comps if keep_components else {},
    )


def fanova_exact(table: BenchTable, metric: str = "test", max_order: int = 2,
                 percentile_clamp: float | None = None, budget_epochs: int | None = None
                 ) -> Decomposition:
    """Functional ANOVA of a table's per-config mean ``metric``."""
    y = metric_vector(table, metric, budget_epochs).reshape(table.space.shape)
    return fanova_grid(y, table.space.names, max_order, percentile_clamp)


def fanova_values(space: ConfigSpace, values: np.ndarray, max_order: int = 2,
                  percentile_clamp: float | None = None) -> Decomposition:
    """Functional ANOVA of raw per-cell values listed in config-index order."""
    y = np.asarray(values, dtype=np.float64).reshape(space.shape)
    return fanova_grid(y, space.names, max_order, percentile_clamp)


@dataclass
class ImportanceReport:
    unary: list  # (name, fraction), descending
    pairwise: list  # (name_a, name_b, fraction), descending, at most top_k


def importance_report(decomp: Decomposition, top_k: int = 10) -> ImportanceReport:
    if decomp.max_order < 2 and len(decomp.names) > 1:
        raise ValueError("pairwise importance needs a decomposition of order >= 2")
    unary = sorted(decomp.unary(), key=lambda t: -t[1])
    pairs = [(decomp.names[min(u)], decomp.names[max(u)], decomp.fraction(u), sorted(u))
             for u in decomp.variances if len(u) == 2]
    pairs.sort(key=lambda t: (-t[2], t[3]))
    return ImportanceReport(unary, [p[:3] for p in pairs[:top_k]])

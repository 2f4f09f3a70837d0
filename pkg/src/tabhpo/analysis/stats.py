"""Distributional statistics of benchmark tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import ks_2samp, rankdata

from ..table import BenchTable


@dataclass(frozen=True)
class Ecdf:
    """Right-continuous empirical CDF of a finite sample."""

    values: np.ndarray

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        r = np.searchsorted(self.values, x, side="right") / len(self.values)
        return float(r) if np.ndim(r) == 0 else r

    @property
    def n(self) -> int:
        return len(self.values)

    def steps(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct jump locations and the CDF value just after each."""
        xs, counts = np.unique(self.values, return_counts=True)
        return xs, np.cumsum(counts) / self.n


def ecdf(samples) -> Ecdf:
    v = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if v.size == 0:
        raise ValueError("ecdf of an empty sample")
    if not np.isfinite(v).all():
        raise ValueError("ecdf samples must be finite")
    v.setflags(write=False)
    return Ecdf(v)


def spearman(xs, ys) -> float:
    """Pearson correlation of tie-averaged ranks."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("spearman needs two 1-d samples of equal length >= 2")
    rx = rankdata(x) - (len(x) + 1) / 2.0
    ry = rankdata(y) - (len(y) + 1) / 2.0
    den = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if den == 0:
        raise ValueError("spearman is undefined when either sample has constant ranks")
    return max(-1.0, min(1.0, float(rx @ ry) / den))


def noise_std(table: BenchTable, config: int, epoch: int, split: str = "valid") -> float:
    """Population std of one config's error across repeats after ``epoch`` epochs."""
    return float(noise_all(table, epoch, split)[config])


def noise_all(table: BenchTable, epoch: int, split: str = "valid") -> np.ndarray:
    if table.n_seeds < 2:
        raise ValueError("noise needs at least two repeats per config")
    if split not in ("valid", "train", "test"):
        raise ValueError(f"unknown split {split!r}")
    if split == "test":
        return table.test.std(axis=1)
    if not 1 <= epoch <= table.max_epochs:
        raise ValueError(f"epoch {epoch} outside [1, {table.max_epochs}]")
    curves = table.valid if split == "valid" else table.train
    return curves[:, :, epoch - 1].std(axis=1)


def top_configs(scores: np.ndarray, frac: float) -> np.ndarray:
    """Indices of the best ``ceil(frac * n)`` configs (lowest score, lowest index on ties)."""
    if not 0 < frac <= 1:
        raise ValueError(f"fraction {frac} outside (0, 1]")
    k = math.ceil(frac * len(scores) - 1e-9)
    if k < 2:
        raise ValueError(f"top {frac:g} of {len(scores)} configs selects fewer than 2")
    return np.sort(np.argsort(scores, kind="stable")[:k])


def rank_corr_budgets(table: BenchTable, budgets: Sequence[int],
                      top_fracs: Sequence[float] = (0.01, 0.1, 0.2, 0.5, 1.0),
                      select_by: str = "test") -> np.ndarray:
    """Spearman correlation between mean validation error at each budget and at the
    maximum budget, restricted to the top fraction of configs.

    Returns an array of shape ``(len(budgets), len(top_fracs))``. Configs are
    ranked for selection by mean test error (``select_by="test"``) or by mean
    final validation error (``"valid"``).
    """
    if select_by not in ("test", "valid"):
        raise ValueError(f"select_by must be 'test' or 'valid', got {select_by!r}")
    final = table.mean_valid_at(table.max_epochs)
    score = np.asarray(table.mean_test) if select_by == "test" else final
    out = np.empty((len(budgets), len(top_fracs)))
    selections = [top_configs(score, f) for f in top_fracs]
    for i, b in enumerate(budgets):
        at_b = table.mean_valid_at(int(b))
        for j, sel in enumerate(selections):
            out[i, j] = spearman(at_b[sel], final[sel])
    return out


def cross_dataset_rank_corr(tables: Sequence[BenchTable], top_frac: float = 1.0) -> np.ndarray:
    """Symmetric matrix of rank correlations of mean test error between tables.

    For a pair (A, B) the correlation is computed on A's top configs and on B's
    top configs separately, and the two values are averaged.
    """
    for t in tables[1:]:
        if t.space != tables[0].space:
            raise ValueError(f"table {t.dataset_name!r} has a different configuration space")
    means = [np.asarray(t.mean_test) for t in tables]
    tops = [top_configs(m, top_frac) for m in means]
    n = len(tables)
    out = np.eye(n)
    for a in range(n):
        for b in range(a + 1, n):
            rho = 0.5 * (spearman(means[a][tops[a]], means[b][tops[a]])
                         + spearman(means[a][tops[b]], means[b][tops[b]]))
            out[a, b] = out[b, a] = rho
    return out


def ks_left_of(a, b) -> tuple[float, float]:
    """One-sided two-sample KS test of H1: ``a`` is stochastically smaller than ``b``
    (its ECDF lies above/left of ``b``'s). Returns (statistic, p-value)."""
    res = ks_2samp(a, b, alternative="greater")
    return float(res.statistic), float(res.pvalue)

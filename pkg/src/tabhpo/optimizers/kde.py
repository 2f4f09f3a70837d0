"""Kernel densities over discrete grids.

Each dimension uses a kernel matrix ``K[v, u]``: the probability of value
position ``v`` under a kernel centred at ``u``. Columns sum to one, so
densities built from them are proper distributions over the grid.

* categorical: Aitchison-Aitken, ``1 - h`` on the centre and ``h / (c - 1)``
  elsewhere, ``h`` in ``[0, (c - 1) / c]`` (the upper end is uniform);
* ordinal: Wang-van Ryzin weights ``1`` on the centre and ``h**|v - u| / 2``
  elsewhere, renormalised over the finite domain, ``h`` in ``[0, 1]``.
"""

from __future__ import annotations

import numpy as np

from ..space import ORDINAL, ConfigSpace

N_BANDWIDTH_GRID = 24
_TINY = 1e-300


def max_bandwidth(card: int, ordinal: bool) -> float:
    if card <= 1:
        return 0.0
    return 1.0 if ordinal else (card - 1) / card


def kernel_matrix(card: int, ordinal: bool, h: float) -> np.ndarray:
    if card == 1:
        return np.ones((1, 1))
    v = np.arange(card)
    dist = np.abs(v[:, None] - v[None, :])
    if ordinal:
        w = np.where(dist == 0, 1.0, 0.5 * h ** dist.astype(np.float64))
        return w / w.sum(axis=0, keepdims=True)
    return np.where(dist == 0, 1.0 - h, h / (card - 1))


def clip_bandwidth(h: float, card: int, ordinal: bool, floor: float) -> float:
    hi = max_bandwidth(card, ordinal)
    return float(min(max(h, floor), hi))


class SpaceKernels:
    """Per-dimension kernel metadata for a configuration space."""

    def __init__(self, space: ConfigSpace):
        self.cards = np.array(space.shape)
        self.ordinal = np.array([p.kind == ORDINAL for p in space.params])
        self.d = space.ndim
        self.grids = []
        for c, o in zip(self.cards, self.ordinal):
            hi = max_bandwidth(int(c), bool(o))
            hs = np.linspace(hi / N_BANDWIDTH_GRID, hi, N_BANDWIDTH_GRID) if hi > 0 else np.zeros(1)
            self.grids.append((hs, np.stack([kernel_matrix(int(c), bool(o), h) for h in hs])))

    def matrices(self, bandwidths) -> list:
        return [kernel_matrix(int(c), bool(o), float(h))
                for c, o, h in zip(self.cards, self.ordinal, bandwidths)]

    def clip(self, bandwidths, floor: float) -> np.ndarray:
        return np.array([clip_bandwidth(h, int(c), bool(o), floor)
                         for h, c, o in zip(bandwidths, self.cards, self.ordinal)])


def mlcv_bandwidths(kernels: SpaceKernels, data: np.ndarray, sweeps: int = 2) -> np.ndarray:
    """Per-dimension bandwidths of a product-kernel density maximising the
    leave-one-out log-likelihood, by coordinate ascent over a bandwidth grid."""
    data = np.asarray(data, dtype=np.int64)
    n, d = data.shape
    h = np.array([g[0][len(g[0]) // 2] for g in kernels.grids])
    if n < 2:
        return h
    log_k = np.empty((d, n, n))
    for j in range(d):
        K = kernel_matrix(int(kernels.cards[j]), bool(kernels.ordinal[j]), h[j])
        log_k[j] = np.log(np.maximum(K[data[:, j][:, None], data[:, j][None, :]], _TINY))
    off = ~np.eye(n, dtype=bool)
    for _ in range(sweeps):
        for j in range(d):
            hs, Ks = kernels.grids[j]
            if len(hs) == 1:
                continue
            rest = np.exp(log_k.sum(axis=0) - log_k[j]) * off
            onehot = np.zeros((n, int(kernels.cards[j])))
            onehot[np.arange(n), data[:, j]] = 1.0
            mass = rest @ onehot  # mass[i, u]: other-dimension weight of points j != i at value u
            # rows[h, i, u] = K_h[x_i, u]
            rows = Ks[:, data[:, j], :]
            dens = (rows * mass[None]).sum(axis=2)
            ll = np.log(np.maximum(dens, _TINY)).sum(axis=1)
            best = int(np.argmax(ll))
            h[j] = hs[best]
            K = Ks[best]
            log_k[j] = np.log(np.maximum(K[data[:, j][:, None], data[:, j][None, :]], _TINY))
    return h


def univariate_mlcv_bandwidths(kernels: SpaceKernels, data: np.ndarray) -> np.ndarray:
    """Leave-one-out likelihood bandwidth per dimension, each fitted on its own."""
    data = np.asarray(data, dtype=np.int64)
    n, d = data.shape
    h = np.array([g[0][len(g[0]) // 2] for g in kernels.grids])
    if n < 2:
        return h
    for j in range(d):
        hs, Ks = kernels.grids[j]
        if len(hs) == 1:
            continue
        c = int(kernels.cards[j])
        counts = np.bincount(data[:, j], minlength=c).astype(np.float64)
        others = counts[None, :] - np.eye(c)  # others[v, u]: points at u excluding one at v
        # dens[h, v] = sum_u K_h[v, u] * others[v, u]
        dens = (Ks * others[None]).sum(axis=2)
        ll = (np.log(np.maximum(dens, _TINY)) * counts[None]).sum(axis=1)
        h[j] = hs[int(np.argmax(ll))]
    return h


class ProductKDE:
    """Multivariate density: average over data points of per-dimension kernel products."""

    def __init__(self, kernels: SpaceKernels, data: np.ndarray, bandwidths: np.ndarray):
        self.kernels = kernels
        self.data = np.asarray(data, dtype=np.int64)
        self.bandwidths = np.asarray(bandwidths, dtype=np.float64)
        self.mats = kernels.matrices(self.bandwidths)

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.int64))
        prod = np.ones((len(x), len(self.data)))
        for j, K in enumerate(self.mats):
            prod *= K[x[:, j][:, None], self.data[:, j][None, :]]
        return prod.mean(axis=1)

    def sample(self, rng: np.random.Generator, n: int, bandwidth_factor: float = 1.0,
               floor: float = 0.0) -> np.ndarray:
        """Pick a data point uniformly, then draw each coordinate from its kernel
        widened by ``bandwidth_factor``."""
        bw = self.kernels.clip(self.bandwidths * bandwidth_factor, floor)
        mats = self.kernels.matrices(bw)
        centres = self.data[rng.integers(len(self.data), size=n)]
        out = np.empty_like(centres)
        for j, K in enumerate(mats):
            cdf = np.cumsum(K[:, centres[:, j]], axis=0)
            u = rng.random(n) * cdf[-1]
            out[:, j] = (u[None, :] >= cdf).sum(axis=0)
        return np.minimum(out, self.kernels.cards - 1)


class IndependentKDE:
    """Product over dimensions of univariate kernel mixtures (dimensions independent)."""

    def __init__(self, kernels: SpaceKernels, data: np.ndarray, bandwidths: np.ndarray,
                 prior_weight: float = 0.0):
        """``prior_weight`` mixes in a uniform pseudo-observation of that weight."""
        self.kernels = kernels
        self.data = np.asarray(data, dtype=np.int64)
        self.bandwidths = np.asarray(bandwidths, dtype=np.float64)
        self.marginals = []
        total = len(self.data) + prior_weight
        for j, K in enumerate(kernels.matrices(self.bandwidths)):
            c = int(kernels.cards[j])
            counts = np.bincount(self.data[:, j], minlength=c)
            self.marginals.append((K @ counts + prior_weight / c) / total)

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.int64))
        out = np.ones(len(x))
        for j, m in enumerate(self.marginals):
            out *= m[x[:, j]]
        return out

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.empty((n, len(self.marginals)), dtype=np.int64)
        for j, m in enumerate(self.marginals):
            cdf = np.cumsum(m)
            out[:, j] = np.minimum(np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right"),
                                   len(m) - 1)
        return out


def rank_order(losses: np.ndarray) -> np.ndarray:
    """Observation indices sorted by loss; ties keep observation order."""
    losses = np.asarray(losses)
    return np.lexsort((np.arange(len(losses)), losses))

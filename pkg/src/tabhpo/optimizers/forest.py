"""Random regression forest over integer-coded grid configurations.

Trees split on ``x[f] <= t`` with exhaustive threshold search per feature
(features are value positions with few levels). Each tree sees a bootstrap
resample and, at every node, up to ``max_features`` non-constant features
visited in random order. Leaves may hold a single sample. The builders are
compiled with numba because the optimizer refits after every observation.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _build_tree(X, y, cards, rows, max_features, feature, threshold, left, right, value):
    n = rows.shape[0]
    d = X.shape[1]
    cmax = 0
    for j in range(d):
        if cards[j] > cmax:
            cmax = cards[j]
    idx = rows.copy()
    # explicit stack of (node, start, end)
    stack = np.empty((2 * n + 2, 3), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    top = 1
    n_nodes = 1
    cnt = np.zeros(cmax, dtype=np.int64)
    sm = np.zeros(cmax)
    order = np.arange(d)
    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        m = end - start
        total = 0.0
        lo = np.inf
        hi = -np.inf
        for k in range(start, end):
            v = y[idx[k]]
            total += v
            if v < lo:
                lo = v
            if v > hi:
                hi = v
        value[node] = total / m
        feature[node] = -1
        if m < 2 or lo == hi:
            continue
        np.random.shuffle(order)
        best_gain = -np.inf
        best_f = -1
        best_t = -1
        visited = 0
        for oi in range(d):
            f = order[oi]
            c = cards[f]
            for v in range(c):
                cnt[v] = 0
                sm[v] = 0.0
            for k in range(start, end):
                r = idx[k]
                cnt[X[r, f]] += 1
                sm[X[r, f]] += y[r]
            present = 0
            for v in range(c):
                if cnt[v] > 0:
                    present += 1
            if present < 2:
                continue
            visited += 1
            nl = 0
            sl = 0.0
            for t in range(c - 1):
                nl += cnt[t]
                sl += sm[t]
                if cnt[t] == 0 or nl == m:
                    continue
                nr = m - nl
                sr = total - sl
                gain = sl * sl / nl + sr * sr / nr
                if gain > best_gain:
                    best_gain = gain
                    best_f = f
                    best_t = t
            if visited >= max_features:
                break
        if best_f < 0:
            continue
        # partition idx[start:end] so that x[best_f] <= best_t comes first
        i = start
        j = end - 1
        while i <= j:
            if X[idx[i], best_f] <= best_t:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        feature[node] = best_f
        threshold[node] = best_t
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack[top, 0] = n_nodes
        stack[top, 1] = start
        stack[top, 2] = i
        stack[top + 1, 0] = n_nodes + 1
        stack[top + 1, 1] = i
        stack[top + 1, 2] = end
        top += 2
        n_nodes += 2
    return n_nodes


@njit(cache=True)
def _fit_forest(X, y, cards, n_trees, max_features, seed):
    np.random.seed(seed)
    n = X.shape[0]
    cap = 2 * n + 1
    feature = np.full((n_trees, cap), -1, dtype=np.int64)
    threshold = np.zeros((n_trees, cap), dtype=np.int64)
    left = np.zeros((n_trees, cap), dtype=np.int64)
    right = np.zeros((n_trees, cap), dtype=np.int64)
    value = np.zeros((n_trees, cap))
    for t in range(n_trees):
        rows = np.random.randint(0, n, n)
        _build_tree(X, y, cards, rows, max_features, feature[t], threshold[t], left[t],
                    right[t], value[t])
    return feature, threshold, left, right, value


@njit(cache=True)
def _predict(feature, threshold, left, right, value, Xq):
    n_trees = feature.shape[0]
    out = np.empty((n_trees, Xq.shape[0]))
    for t in range(n_trees):
        for q in range(Xq.shape[0]):
            node = 0
            while feature[t, node] >= 0:
                if Xq[q, feature[t, node]] <= threshold[t, node]:
                    node = left[t, node]
                else:
                    node = right[t, node]
            out[t, q] = value[t, node]
    return out


class RandomForest:
    def __init__(self, cards, n_trees: int = 10, max_features: int | None = None):
        self.cards = np.asarray(cards, dtype=np.int64)
        self.n_trees = n_trees
        d = len(self.cards)
        self.max_features = (d + 1) // 2 if max_features is None else max_features
        self._trees = None

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int) -> "RandomForest":
        X = np.ascontiguousarray(X, dtype=np.int64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        self._trees = _fit_forest(X, y, self.cards, self.n_trees, self.max_features, int(seed))
        return self

    def tree_predictions(self, Xq: np.ndarray) -> np.ndarray:
        """(n_trees, n_queries) array of per-tree predictions."""
        return _predict(*self._trees, np.ascontiguousarray(Xq, dtype=np.int64))

    def predict(self, Xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Across-tree mean and (population) variance."""
        p = self.tree_predictions(Xq)
        return p.mean(axis=0), p.var(axis=0)

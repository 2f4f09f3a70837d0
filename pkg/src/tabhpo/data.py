"""Regression dataset ingestion: parsing, splitting and normalisation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class DatasetError(ValueError):
    pass


@dataclass
class DatasetSplit:
    train_x: np.ndarray
    train_y: np.ndarray
    valid_x: np.ndarray
    valid_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    feature_means: np.ndarray
    feature_scales: np.ndarray
    target_mean: float
    target_scale: float
    kept_features: list

    @property
    def n_features(self) -> int:
        return self.train_x.shape[1]

    def denormalize_targets(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y) * self.target_scale + self.target_mean


def read_delimited(path, delimiter: str | None = None) -> tuple[list[str], np.ndarray]:
    """Read a numeric table with a header row.

    ``delimiter=None`` sniffs comma versus whitespace from the header line.
    Non-numeric cells raise :class:`DatasetError` naming file, line and column.
    """
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DatasetError(f"{path}: empty file")
    if delimiter is None:
        delimiter = "," if "," in lines[0] else None

    def split(line: str) -> list[str]:
        if delimiter is None:
            return line.split()
        return next(csv.reader([line], delimiter=delimiter))

    header = [h.strip() for h in split(lines[0])]
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = split(line)
        if len(cells) != len(header):
            raise DatasetError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            col = next(j for j, c in enumerate(cells) if not _is_float(c))
            raise DatasetError(
                f"{path}:{lineno}: column {header[col]!r} holds non-numeric {cells[col]!r}") from None
    return header, np.array(rows, dtype=np.float64).reshape(len(rows), len(header))


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def split_sizes(n_rows: int, ratios: Sequence[float] = (0.6, 0.2, 0.2)) -> tuple[int, int, int]:
    n_train = int(round(ratios[0] * n_rows))
    n_valid = int(round(ratios[1] * n_rows))
    return n_train, n_valid, n_rows - n_train - n_valid


def prepare_dataset(data: np.ndarray, target: int, rng: np.random.Generator,
                    ratios: Sequence[float] = (0.6, 0.2, 0.2)) -> DatasetSplit:
    """Shuffle once, split, drop constant features, normalise with training statistics.

    Features and targets are centred by the training mean and divided by the
    training *variance*.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 10:
        raise DatasetError(f"need a 2-d table with at least 10 rows, got shape {data.shape}")
    if not np.isfinite(data).all():
        raise DatasetError("dataset contains non-finite cells")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DatasetError(f"split ratios must sum to 1, got {list(ratios)}")
    n_cols = data.shape[1]
    target = target % n_cols
    feature_cols = [j for j in range(n_cols) if j != target]
    x_all, y_all = data[:, feature_cols], data[:, target]
    varying = np.ptp(x_all, axis=0) > 0
    if not varying.any():
        raise DatasetError("every feature column is constant")
    kept = [feature_cols[j] for j in np.flatnonzero(varying)]
    x_all = x_all[:, varying]

    perm = rng.permutation(data.shape[0])
    x_all, y_all = x_all[perm], y_all[perm]
    n_train, n_valid, _ = split_sizes(data.shape[0], ratios)
    parts = np.split(np.arange(data.shape[0]), [n_train, n_train + n_valid])

    fx_mean = x_all[parts[0]].mean(axis=0)
    fx_scale = x_all[parts[0]].var(axis=0)
    # a feature can vary overall yet be constant on the training rows
    fx_scale[fx_scale == 0] = 1.0
    y_mean = float(y_all[parts[0]].mean())
    y_scale = float(y_all[parts[0]].var()) or 1.0

    def norm(idx):
        return (x_all[idx] - fx_mean) / fx_scale, (y_all[idx] - y_mean) / y_scale

    (tx, ty), (vx, vy), (sx, sy) = (norm(p) for p in parts)
    return DatasetSplit(tx, ty, vx, vy, sx, sy, fx_mean, fx_scale, y_mean, y_scale, kept)


def make_toy_regression(n_rows: int = 500, n_features: int = 6, noise: float = 0.1,
                        seed: int = 0) -> np.ndarray:
    """Friedman-style nonlinear regression data with a trailing constant column.

    Returns an array whose last column is the target; column ``n_features - 1``
    is constant so the preprocessing has something to drop.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, size=(n_rows, n_features))
    x[:, -1] = 5.0
    y = (10 * np.sin(np.pi * x[:, 0] * x[:, 1]) + 20 * (x[:, 2] - 0.5) ** 2
         + 10 * x[:, 3 % n_features] + 5 * x[:, 4 % n_features])
    y = y + noise * rng.standard_normal(n_rows)
    return np.column_stack([x, y])


def write_csv(path, data: np.ndarray, header: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in data:
            w.writerow([repr(float(v)) for v in row])

"""Discrete configuration spaces and their mixed-radix cell indexing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ORDINAL = "ordinal"
CATEGORICAL = "categorical"


class DomainError(ValueError):
    """A value position or cell index lies outside the configuration space."""


@dataclass(frozen=True)
class Hyperparameter:
    name: str
    kind: str
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if self.kind not in (ORDINAL, CATEGORICAL):
            raise ValueError(f"{self.name}: unknown kind {self.kind!r}")
        if not self.values:
            raise ValueError(f"{self.name}: values must be nonempty")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"{self.name}: values must be distinct")
        if self.kind == ORDINAL:
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in self.values):
                raise ValueError(f"{self.name}: ordinal values must be numeric")
            if any(b <= a for a, b in zip(self.values, self.values[1:])):
                raise ValueError(f"{self.name}: ordinal values must be strictly increasing")

    @property
    def cardinality(self) -> int:
        return len(self.values)

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparameter":
        return cls(d["name"], d["kind"], tuple(d["values"]))


@dataclass(frozen=True)
class ConfigSpace:
    """Ordered product of discrete hyperparameters.

    Cells are numbered in mixed radix with the first parameter as the most
    significant digit, which coincides with C-order reshaping of a flat array
    of per-cell values into ``space.shape``.
    """

    params: tuple
    _strides: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names in {names}")
        strides = np.ones(len(self.params), dtype=np.int64)
        for i in range(len(self.params) - 2, -1, -1):
            strides[i] = strides[i + 1] * self.params[i + 1].cardinality
        strides.setflags(write=False)
        object.__setattr__(self, "_strides", strides)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(p.cardinality for p in self.params)

    @property
    def strides(self) -> np.ndarray:
        return self._strides

    @property
    def ndim(self) -> int:
        return len(self.params)

    def cardinality(self) -> int:
        return math.prod(self.shape)

    def index_of(self, name: str) -> int:
        for i, p in enumerate(self.params):
            if p.name == name:
                return i
        raise KeyError(name)

    def to_list(self) -> list[dict]:
        return [p.to_dict() for p in self.params]

    @classmethod
    def from_list(cls, items: Sequence[dict]) -> "ConfigSpace":
        return cls(tuple(Hyperparameter.from_dict(d) for d in items))

    # -- cell indexing -----------------------------------------------------

    def encode(self, positions: Sequence[int]) -> int:
        return encode_config(self, positions)

    def decode(self, index: int) -> list[int]:
        return decode_config(self, index)

    def values_of(self, index: int) -> dict:
        """Map parameter names to the literal values of cell ``index``."""
        pos = decode_config(self, index)
        return {p.name: p.values[k] for p, k in zip(self.params, pos)}

    def index_from_values(self, values: dict) -> int:
        pos = []
        for p in self.params:
            try:
                pos.append(p.values.index(values[p.name]))
            except ValueError:
                raise DomainError(f"{p.name}: {values[p.name]!r} not in {list(p.values)}") from None
        return encode_config(self, pos)

    def all_positions(self) -> np.ndarray:
        """(cardinality, ndim) array of value positions in index order."""
        return decode_many(self, np.arange(self.cardinality()))


def encode_config(space: ConfigSpace, positions: Sequence[int]) -> int:
    if len(positions) != space.ndim:
        raise DomainError(f"expected {space.ndim} positions, got {len(positions)}")
    index = 0
    for p, k in zip(space.params, positions):
        k = int(k)
        if not 0 <= k < p.cardinality:
            raise DomainError(f"{p.name}: position {k} outside [0, {p.cardinality})")
        index = index * p.cardinality + k
    return index


def decode_config(space: ConfigSpace, index: int) -> list[int]:
    index = int(index)
    n = space.cardinality()
    if not 0 <= index < n:
        raise DomainError(f"config index {index} outside [0, {n})")
    positions = [0] * space.ndim
    for i in range(space.ndim - 1, -1, -1):
        index, positions[i] = divmod(index, space.params[i].cardinality)
    return positions


def encode_many(space: ConfigSpace, positions: np.ndarray) -> np.ndarray:
    """Vectorised :func:`encode_config` over the rows of ``positions``; no range checks."""
    return np.asarray(positions, dtype=np.int64) @ space.strides


def decode_many(space: ConfigSpace, indices: np.ndarray) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    shape = np.array(space.shape, dtype=np.int64)
    return (indices[..., None] // space.strides) % shape


def neighbors(space: ConfigSpace, config: int) -> list[int]:
    """All cells that differ from ``config`` in exactly one parameter.

    Ordered by parameter, then by the replacement value's position.
    """
    pos = decode_config(space, config)
    out = []
    for i, p in enumerate(space.params):
        base = config - pos[i] * int(space.strides[i])
        for k in range(p.cardinality):
            if k != pos[i]:
                out.append(base + k * int(space.strides[i]))
    return out


def n_neighbors(space: ConfigSpace) -> int:
    return sum(c - 1 for c in space.shape)


def table2_space() -> ConfigSpace:
    """The 62,208-cell feed-forward network space (nine parameters)."""
    return ConfigSpace((
        Hyperparameter("init_lr", ORDINAL, (0.0005, 0.001, 0.005, 0.01, 0.05, 0.1)),
        Hyperparameter("batch_size", ORDINAL, (8, 16, 32, 64)),
        Hyperparameter("lr_schedule", CATEGORICAL, ("cosine", "constant")),
        Hyperparameter("act1", CATEGORICAL, ("relu", "tanh")),
        Hyperparameter("act2", CATEGORICAL, ("relu", "tanh")),
        Hyperparameter("layer1_size", ORDINAL, (16, 32, 64, 128, 256, 512)),
        Hyperparameter("layer2_size", ORDINAL, (16, 32, 64, 128, 256, 512)),
        Hyperparameter("dropout1", ORDINAL, (0.0, 0.3, 0.6)),
        Hyperparameter("dropout2", ORDINAL, (0.0, 0.3, 0.6)),
    ))

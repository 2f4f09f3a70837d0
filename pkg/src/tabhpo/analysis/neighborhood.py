"""Sensitivity of a configuration to single-parameter changes."""

from __future__ import annotations

from dataclasses import dataclass

from ..space import decode_config, neighbors
from ..table import BenchTable, metric_vector


@dataclass(frozen=True)
class NeighborRow:
    param: str
    old_value: object
    new_value: object
    config: int
    error: float
    relative_change: float


def local_neighborhood(table: BenchTable, config: int, metric: str = "test",
                       budget_epochs: int | None = None) -> list[NeighborRow]:
    """One row per one-flip neighbour, sorted by relative change (then config index).

    The relative change is ``(y_new - y_ref) / y_ref`` against the reference
    config's mean ``metric``.
    """
    y = metric_vector(table, metric, budget_epochs)
    ref = float(y[config])
    if ref == 0.0:
        raise ZeroDivisionError(f"config {config} has error 0; relative change is undefined")
    space = table.space
    pos = decode_config(space, config)
    rows = []
    for nb in neighbors(space, config):
        npos = decode_config(space, nb)
        j = next(i for i in range(space.ndim) if npos[i] != pos[i])
        p = space.params[j]
        err = float(y[nb])
        rows.append(NeighborRow(p.name, p.values[pos[j]], p.values[npos[j]], nb, err,
                                (err - ref) / ref))
    rows.sort(key=lambda r: (r.relative_change, r.config))
    return rows

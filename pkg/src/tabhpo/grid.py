"""Exhaustive grid training with per-config checkpoints."""

from __future__ import annotations

import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable

import numpy as np

from .data import DatasetSplit
from .mlp import GRID_FIELDS, TrainSpec, train_one
from .space import ConfigSpace
from .table import (BenchTable, EvalEntry, FORMAT_VERSION, TableIntegrityError,
                    parse_entry_line, parse_header, record_to_dict)

log = logging.getLogger(__name__)


def task_seed(master_seed: int, config_index: int, seed_index: int) -> int:
    ss = np.random.SeedSequence([int(master_seed), int(config_index), int(seed_index)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def train_spec(space: ConfigSpace, config_index: int, max_epochs: int, seed: int) -> TrainSpec:
    """Build the TrainSpec of a grid cell; parameters absent from the space keep defaults."""
    unknown = set(space.names) - set(GRID_FIELDS)
    if unknown:
        raise ValueError(f"space parameters {sorted(unknown)} are not network settings "
                         f"(expected a subset of {list(GRID_FIELDS)})")
    values = space.values_of(config_index)
    for key in ("layer1_size", "layer2_size", "batch_size"):
        if key in values:
            values[key] = int(values[key])
    for key in ("dropout1", "dropout2", "init_lr"):
        if key in values:
            values[key] = float(values[key])
    return TrainSpec(max_epochs=max_epochs, seed=seed, **values)


_WORKER_SPLIT: DatasetSplit | None = None


def _init_worker(split: DatasetSplit) -> None:
    global _WORKER_SPLIT
    _WORKER_SPLIT = split


def _train_config(args) -> tuple[int, str]:
    space, index, n_seeds, max_epochs, master_seed, timing = args
    records = [
        train_one(_WORKER_SPLIT, train_spec(space, index, max_epochs,
                                            task_seed(master_seed, index, k)), timing=timing)
        for k in range(n_seeds)
    ]
    return index, json.dumps({"records": [record_to_dict(r) for r in records]}, allow_nan=False)


def _entry_path(checkpoint_dir: Path, index: int) -> Path:
    return checkpoint_dir / "entries" / f"{index:07d}.json"


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def run_grid(space: ConfigSpace, split: DatasetSplit, n_seeds: int, max_epochs: int,
             master_seed: int, checkpoint_dir=None, jobs: int = 1, timing: str = "wall",
             dataset_name: str = "dataset",
             progress: Callable[[int, int], None] | None = None) -> BenchTable:
    """Train every cell of ``space`` ``n_seeds`` times and assemble the table.

    With ``checkpoint_dir`` each finished config is written to its own file and
    configs already present are skipped, so a killed run resumes where it
    stopped. ``progress(done, total)`` is called after every config.
    """
    n = space.cardinality()
    header = {
        "format_version": FORMAT_VERSION, "dataset_name": dataset_name,
        "max_epochs": int(max_epochs), "n_seeds": int(n_seeds), "space": space.to_list(),
    }
    if checkpoint_dir is None:
        with tempfile.TemporaryDirectory() as tmp:
            return run_grid(space, split, n_seeds, max_epochs, master_seed, tmp, jobs, timing,
                            dataset_name, progress)

    ckpt = Path(checkpoint_dir)
    (ckpt / "entries").mkdir(parents=True, exist_ok=True)
    meta = dict(header, master_seed=int(master_seed), timing=timing,
                n_features=int(split.n_features))
    meta_path = ckpt / "run.json"
    if meta_path.exists():
        previous = json.loads(meta_path.read_text(encoding="utf-8"))
        if previous != meta:
            raise TableIntegrityError(f"{meta_path}: checkpoint belongs to a different run")
    else:
        _write_atomic(meta_path, json.dumps(meta))

    todo = [i for i in range(n) if not _entry_path(ckpt, i).exists()]
    done = n - len(todo)
    if done:
        log.info("resuming grid: %d of %d configs already trained", done, n)
    tasks = [(space, i, n_seeds, max_epochs, master_seed, timing) for i in todo]

    def consume(results):
        nonlocal done
        for index, line in results:
            _write_atomic(_entry_path(ckpt, index), line + "\n")
            done += 1
            if progress is not None:
                progress(done, n)

    if jobs <= 1:
        _init_worker(split)
        consume(_train_config(t) for t in tasks)
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(split,)) as pool:
            consume(pool.map(_train_config, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    return finalize(ckpt)


def finalize(checkpoint_dir) -> BenchTable:
    """Merge a complete checkpoint directory into a table."""
    ckpt = Path(checkpoint_dir)
    meta = json.loads((ckpt / "run.json").read_text(encoding="utf-8"))
    header = parse_header(json.dumps(meta), where=str(ckpt / "run.json"))
    space: ConfigSpace = header["space"]
    entries = []
    for i in range(space.cardinality()):
        path = _entry_path(ckpt, i)
        if not path.exists():
            raise TableIntegrityError(f"{ckpt}: config {i} has not been trained yet")
        records = parse_entry_line(path.read_text(encoding="utf-8"), 1, meta["max_epochs"])
        entries.append(EvalEntry(records))
    return BenchTable.from_entries(space, meta["max_epochs"], meta["dataset_name"], entries)

"""Exhaustive evaluation tables and the noisy, time-charged objective they serve."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .space import ConfigSpace, DomainError

FORMAT_VERSION = 1
METRICS = ("train", "valid", "test", "runtime", "n_params")


class TableError(Exception):
    pass


class TableParseError(TableError, ValueError):
    pass


class TableIntegrityError(TableError):
    pass


@dataclass
class SeedRecord:
    seed: int
    train_curve: list
    valid_curve: list
    final_test_mse: float
    runtime_seconds: float
    n_params: int
    diverged: bool = False


@dataclass
class EvalEntry:
    records: list


@dataclass(frozen=True)
class QueryResult:
    valid_mse: float
    runtime_charged_seconds: float
    seed_drawn: int
    budget_epochs: int


class BenchTable:
    """Dense grid -> per-seed learning curves, test error, runtime and size.

    Arrays are indexed ``[config, seed_slot, epoch]``; ``seeds`` holds the rng
    seed each slot was trained with. Instances are treated as immutable.
    """

    def __init__(self, space: ConfigSpace, max_epochs: int, dataset_name: str,
                 train: np.ndarray, valid: np.ndarray, test: np.ndarray,
                 runtime: np.ndarray, n_params: np.ndarray, seeds: np.ndarray,
                 diverged: np.ndarray | None = None):
        self.space = space
        self.max_epochs = int(max_epochs)
        self.dataset_name = dataset_name
        self.train = np.asarray(train, dtype=np.float64)
        self.valid = np.asarray(valid, dtype=np.float64)
        self.test = np.asarray(test, dtype=np.float64)
        self.runtime = np.asarray(runtime, dtype=np.float64)
        self.n_params = np.asarray(n_params, dtype=np.int64)
        self.seeds = np.asarray(seeds, dtype=np.int64)
        if diverged is None:
            diverged = np.zeros(self.test.shape, dtype=bool)
        self.diverged = np.asarray(diverged, dtype=bool)
        for a in (self.train, self.valid, self.test, self.runtime, self.n_params,
                  self.seeds, self.diverged):
            a.setflags(write=False)
        problems = self._shape_problems()
        if problems:
            raise TableIntegrityError("; ".join(problems))
        self._mean_test = None

    def _shape_problems(self) -> list[str]:
        n = self.space.cardinality()
        s = self.test.shape[1] if self.test.ndim == 2 else -1
        want = {
            "train": (n, s, self.max_epochs), "valid": (n, s, self.max_epochs),
            "test": (n, s), "runtime": (n, s), "seeds": (n, s), "diverged": (n, s),
            "n_params": (n,),
        }
        out = []
        if self.test.ndim != 2 or self.test.shape[0] != n:
            out.append(f"test has shape {self.test.shape}, expected ({n}, n_seeds)")
            return out
        if s < 1:
            out.append("tables need at least one seed per entry")
        for name, shape in want.items():
            got = getattr(self, name).shape
            if got != shape:
                out.append(f"{name} has shape {got}, expected {shape}")
        return out

    @property
    def n_configs(self) -> int:
        return self.test.shape[0]

    @property
    def n_seeds(self) -> int:
        return self.test.shape[1]

    def __len__(self) -> int:
        return self.n_configs

    def entry(self, config: int) -> EvalEntry:
        self._check_config(config)
        return EvalEntry([
            SeedRecord(
                seed=int(self.seeds[config, k]),
                train_curve=self.train[config, k].tolist(),
                valid_curve=self.valid[config, k].tolist(),
                final_test_mse=float(self.test[config, k]),
                runtime_seconds=float(self.runtime[config, k]),
                n_params=int(self.n_params[config]),
                diverged=bool(self.diverged[config, k]),
            )
            for k in range(self.n_seeds)
        ])

    @classmethod
    def from_entries(cls, space: ConfigSpace, max_epochs: int, dataset_name: str,
                     entries: list) -> "BenchTable":
        n = space.cardinality()
        if len(entries) != n:
            raise TableIntegrityError(f"{len(entries)} entries for a space of {n} cells")
        s = len(entries[0].records)
        shape = (n, s)
        train = np.empty(shape + (max_epochs,))
        valid = np.empty(shape + (max_epochs,))
        test, runtime = np.empty(shape), np.empty(shape)
        seeds = np.empty(shape, dtype=np.int64)
        diverged = np.zeros(shape, dtype=bool)
        n_params = np.empty(n, dtype=np.int64)
        for i, e in enumerate(entries):
            if len(e.records) != s:
                raise TableIntegrityError(f"entry {i}: {len(e.records)} records, expected {s}")
            n_params[i] = e.records[0].n_params
            for k, r in enumerate(e.records):
                if r.n_params != n_params[i]:
                    raise TableIntegrityError(f"entry {i}: records disagree on n_params")
                if len(r.train_curve) != max_epochs or len(r.valid_curve) != max_epochs:
                    raise TableIntegrityError(
                        f"entry {i} record {k}: curves must have {max_epochs} epochs")
                train[i, k] = r.train_curve
                valid[i, k] = r.valid_curve
                test[i, k] = r.final_test_mse
                runtime[i, k] = r.runtime_seconds
                seeds[i, k] = r.seed
                diverged[i, k] = r.diverged
        return cls(space, max_epochs, dataset_name, train, valid, test, runtime,
                   n_params, seeds, diverged)

    def _check_config(self, config: int) -> None:
        if not 0 <= int(config) < self.n_configs:
            raise DomainError(f"config index {config} outside [0, {self.n_configs})")

    def _check_budget(self, budget: int) -> None:
        if not 1 <= int(budget) <= self.max_epochs:
            raise DomainError(f"budget {budget} outside [1, {self.max_epochs}]")

    # -- derived per-config statistics, cached since the table is immutable --

    @property
    def mean_test(self) -> np.ndarray:
        if self._mean_test is None:
            m = self.test.mean(axis=1)
            m.setflags(write=False)
            self._mean_test = m
        return self._mean_test

    def mean_valid_at(self, budget: int) -> np.ndarray:
        self._check_budget(budget)
        return self.valid[:, :, budget - 1].mean(axis=1)

    def header(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "dataset_name": self.dataset_name,
            "max_epochs": self.max_epochs,
            "n_seeds": self.n_seeds,
            "space": self.space.to_list(),
        }

    def checksum(self) -> str:
        h = hashlib.sha256(json.dumps(self.header(), sort_keys=True).encode())
        for a in (self.train, self.valid, self.test, self.runtime, self.n_params,
                  self.seeds, self.diverged):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()

    def equals(self, other: "BenchTable") -> bool:
        return self.header() == other.header() and all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("train", "valid", "test", "runtime", "n_params", "seeds", "diverged"))


def charge(runtime_seconds: float, budget_epochs: int, max_epochs: int) -> float:
    """Simulated cost of training ``budget_epochs`` of a full run, prorated linearly."""
    return runtime_seconds * budget_epochs / max_epochs


def query(table: BenchTable, config: int, budget_epochs: int,
          rng: np.random.Generator) -> QueryResult:
    """Observe one uniformly drawn repeat of ``config`` after ``budget_epochs`` epochs."""
    table._check_budget(budget_epochs)
    table._check_config(config)
    k = int(rng.integers(table.n_seeds))
    return QueryResult(
        valid_mse=float(table.valid[config, k, budget_epochs - 1]),
        runtime_charged_seconds=charge(float(table.runtime[config, k]), budget_epochs,
                                       table.max_epochs),
        seed_drawn=int(table.seeds[config, k]),
        budget_epochs=int(budget_epochs),
    )


def mean_metric(table: BenchTable, config: int, metric: str,
                budget_epochs: int | None = None) -> float:
    table._check_config(config)
    if budget_epochs is None:
        budget_epochs = table.max_epochs
    table._check_budget(budget_epochs)
    if metric == "train":
        return float(table.train[config, :, budget_epochs - 1].mean())
    if metric == "valid":
        return float(table.valid[config, :, budget_epochs - 1].mean())
    if metric == "test":
        return float(table.mean_test[config])
    if metric == "runtime":
        return float(table.runtime[config].mean())
    if metric == "n_params":
        return float(table.n_params[config])
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def metric_vector(table: BenchTable, metric: str, budget_epochs: int | None = None) -> np.ndarray:
    """:func:`mean_metric` for every config at once."""
    b = table.max_epochs if budget_epochs is None else budget_epochs
    table._check_budget(b)
    if metric == "train":
        return table.train[:, :, b - 1].mean(axis=1)
    if metric == "valid":
        return table.valid[:, :, b - 1].mean(axis=1)
    if metric == "test":
        return np.array(table.mean_test)
    if metric == "runtime":
        return table.runtime.mean(axis=1)
    if metric == "n_params":
        return table.n_params.astype(np.float64)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def global_optimum(table: BenchTable) -> tuple[int, float]:
    """Config with the lowest mean test error; lowest index on ties."""
    i = int(np.argmin(table.mean_test))
    return i, float(table.mean_test[i])


# -- validation ------------------------------------------------------------

def validate(table: BenchTable) -> list[str]:
    """Return a list of invariant violations (empty when the table is sound)."""
    problems = table._shape_problems()
    if problems:
        return problems
    for name in ("train", "valid"):
        a = getattr(table, name)
        bad = ~np.isfinite(a) | (a < 0)
        if bad.any():
            i, k, t = np.argwhere(bad)[0]
            problems.append(f"{name} curve of config {i} seed slot {k} epoch {t + 1} "
                            f"is {a[i, k, t]!r}")
    bad = ~np.isfinite(table.test) | (table.test < 0)
    if bad.any():
        i, k = np.argwhere(bad)[0]
        problems.append(f"final test mse of config {i} seed slot {k} is {table.test[i, k]!r}")
    bad = ~(table.runtime > 0) | ~np.isfinite(table.runtime)
    if bad.any():
        i, k = np.argwhere(bad)[0]
        problems.append(f"runtime of config {i} seed slot {k} is {table.runtime[i, k]!r}")
    if (table.n_params < 1).any():
        i = int(np.argmax(table.n_params < 1))
        problems.append(f"n_params of config {i} is {table.n_params[i]}")
    return problems


# -- file format -----------------------------------------------------------

def _record_dict(table: BenchTable, i: int, k: int) -> dict:
    d = {
        "seed": int(table.seeds[i, k]),
        "train_curve": table.train[i, k].tolist(),
        "valid_curve": table.valid[i, k].tolist(),
        "final_test_mse": float(table.test[i, k]),
        "runtime_seconds": float(table.runtime[i, k]),
        "n_params": int(table.n_params[i]),
    }
    if table.diverged[i, k]:
        d["diverged"] = True
    return d


def entry_line(table: BenchTable, i: int) -> str:
    return json.dumps({"records": [_record_dict(table, i, k) for k in range(table.n_seeds)]},
                      allow_nan=False)


def record_to_dict(r: SeedRecord) -> dict:
    d = {
        "seed": int(r.seed),
        "train_curve": [float(x) for x in r.train_curve],
        "valid_curve": [float(x) for x in r.valid_curve],
        "final_test_mse": float(r.final_test_mse),
        "runtime_seconds": float(r.runtime_seconds),
        "n_params": int(r.n_params),
    }
    if r.diverged:
        d["diverged"] = True
    return d


def save_table(table: BenchTable, path) -> None:
    """Write the line-oriented JSON format; Python's float repr round-trips exactly."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(table.header()) + "\n")
        for i in range(table.n_configs):
            fh.write(entry_line(table, i) + "\n")
    tmp.replace(path)


_RECORD_KEYS = ("seed", "train_curve", "valid_curve", "final_test_mse", "runtime_seconds",
                "n_params")


def parse_header(text: str, where: str = "line 1") -> dict:
    try:
        header = json.loads(text)
    except json.JSONDecodeError as e:
        raise TableParseError(f"{where}: header is not valid JSON ({e.msg})") from None
    if not isinstance(header, dict):
        raise TableParseError(f"{where}: header must be a JSON object")
    for key in ("format_version", "space"):
        if key not in header:
            raise TableParseError(f"{where}: header lacks field {key!r}")
    if header["format_version"] != FORMAT_VERSION:
        raise TableParseError(f"{where}: unsupported format_version {header['format_version']!r}")
    try:
        header["space"] = ConfigSpace.from_list(header["space"])
    except (KeyError, TypeError, ValueError) as e:
        raise TableParseError(f"{where}: bad space definition ({e})") from None
    return header


def parse_entry_line(text: str, lineno: int, max_epochs: int) -> list[SeedRecord]:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise TableParseError(f"line {lineno}: invalid JSON ({e.msg} at column {e.colno})") from None
    if not isinstance(obj, dict) or not isinstance(obj.get("records"), list):
        raise TableParseError(f"line {lineno}: expected an object with a 'records' list")
    records = []
    for k, r in enumerate(obj["records"]):
        if not isinstance(r, dict):
            raise TableParseError(f"line {lineno}: record {k} is not an object")
        missing = [key for key in _RECORD_KEYS if key not in r]
        if missing:
            raise TableParseError(f"line {lineno}: record {k} lacks field {missing[0]!r}")
        for key in ("train_curve", "valid_curve"):
            if not isinstance(r[key], list) or len(r[key]) != max_epochs:
                raise TableIntegrityError(
                    f"line {lineno}: record {k} field {key!r} must list {max_epochs} values")
        try:
            records.append(SeedRecord(
                seed=int(r["seed"]),
                train_curve=[float(x) for x in r["train_curve"]],
                valid_curve=[float(x) for x in r["valid_curve"]],
                final_test_mse=float(r["final_test_mse"]),
                runtime_seconds=float(r["runtime_seconds"]),
                n_params=int(r["n_params"]),
                diverged=bool(r.get("diverged", False)),
            ))
        except (TypeError, ValueError) as e:
            raise TableParseError(f"line {lineno}: record {k} has a non-numeric field ({e})") from None
    return records


def load_table(path) -> BenchTable:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise TableParseError(f"{path}: line 1: missing header")
        header = parse_header(first)
        space = header["space"]
        for key in ("dataset_name", "max_epochs", "n_seeds"):
            if key not in header:
                raise TableParseError(f"{path}: line 1: header lacks field {key!r}")
        max_epochs, n_seeds = int(header["max_epochs"]), int(header["n_seeds"])
        n = space.cardinality()
        shape = (n, n_seeds)
        train = np.empty(shape + (max_epochs,))
        valid = np.empty(shape + (max_epochs,))
        test, runtime = np.empty(shape), np.empty(shape)
        seeds = np.empty(shape, dtype=np.int64)
        diverged = np.zeros(shape, dtype=bool)
        n_params = np.empty(n, dtype=np.int64)
        i = 0
        for lineno, line in enumerate(fh, start=2):
            if not line.endswith("\n"):
                raise TableParseError(f"{path}: line {lineno}: truncated (no line terminator)")
            if i >= n:
                if line.strip():
                    raise TableIntegrityError(
                        f"{path}: line {lineno}: more entries than the {n} cells of the space")
                continue
            try:
                records = parse_entry_line(line, lineno, max_epochs)
            except TableError as e:
                raise type(e)(f"{path}: {e}") from None
            if len(records) != n_seeds:
                raise TableIntegrityError(
                    f"{path}: line {lineno}: {len(records)} records, header says {n_seeds}")
            n_params[i] = records[0].n_params
            for k, r in enumerate(records):
                if r.n_params != n_params[i]:
                    raise TableIntegrityError(f"{path}: line {lineno}: records disagree on n_params")
                train[i, k], valid[i, k] = r.train_curve, r.valid_curve
                test[i, k], runtime[i, k] = r.final_test_mse, r.runtime_seconds
                seeds[i, k], diverged[i, k] = r.seed, r.diverged
            i += 1
        if i < n:
            raise TableParseError(
                f"{path}: unexpected end of file after {i} of {n} entries (line {i + 2})")
    return BenchTable(space, max_epochs, str(header["dataset_name"]), train, valid, test,
                      runtime, n_params, seeds, diverged)


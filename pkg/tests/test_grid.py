import numpy as np
import pytest

from tabhpo.data import make_toy_regression, prepare_dataset
from tabhpo.grid import finalize, run_grid, task_seed, train_spec
from tabhpo.space import CATEGORICAL, ORDINAL, ConfigSpace, Hyperparameter, table2_space
from tabhpo.table import TableIntegrityError, validate

SPACE = ConfigSpace((
    Hyperparameter("init_lr", ORDINAL, (0.001, 0.01)),
    Hyperparameter("act1", CATEGORICAL, ("relu", "tanh")),
    Hyperparameter("layer1_size", ORDINAL, (4, 8)),
))


@pytest.fixture(scope="module")
def split():
    return prepare_dataset(make_toy_regression(120, 4, seed=0), -1, np.random.default_rng(0))


def test_task_seeds_distinct():
    seeds = {task_seed(0, c, k) for c in range(100) for k in range(4)}
    assert len(seeds) == 400
    assert task_seed(1, 0, 0) != task_seed(0, 0, 0)


def test_train_spec_maps_values():
    sp = table2_space()
    spec = train_spec(sp, 10368, 100, 5)
    assert spec.init_lr == 0.001 and spec.batch_size == 8 and spec.layer1_size == 16
    assert spec.max_epochs == 100 and spec.seed == 5


def test_train_spec_rejects_unknown_parameter():
    sp = ConfigSpace((Hyperparameter("momentum", ORDINAL, (0.1, 0.9)),))
    with pytest.raises(ValueError, match="momentum"):
        train_spec(sp, 0, 10, 0)


def test_grid_is_valid_and_deterministic(split, tmp_path):
    a = run_grid(SPACE, split, 2, 3, 11, tmp_path / "a", timing="model")
    b = run_grid(SPACE, split, 2, 3, 11, None, timing="model")
    assert a.n_configs == 8 and a.n_seeds == 2
    assert validate(a) == []
    assert a.checksum() == b.checksum()
    assert a.seeds[3, 1] == task_seed(11, 3, 1)


def test_resume_after_interruption(split, tmp_path):
    full = run_grid(SPACE, split, 2, 3, 4, tmp_path / "full", timing="model")

    class Stop(Exception):
        pass

    def interrupt(done, total):
        if done == 3:
            raise Stop

    with pytest.raises(Stop):
        run_grid(SPACE, split, 2, 3, 4, tmp_path / "part", timing="model", progress=interrupt)
    assert len(list((tmp_path / "part" / "entries").glob("*.json"))) == 3
    with pytest.raises(TableIntegrityError):
        finalize(tmp_path / "part")
    seen = []
    resumed = run_grid(SPACE, split, 2, 3, 4, tmp_path / "part", timing="model",
                       progress=lambda d, t: seen.append(d))
    assert seen == [4, 5, 6, 7, 8]
    assert resumed.checksum() == full.checksum()


def test_checkpoint_of_other_run_rejected(split, tmp_path):
    run_grid(SPACE, split, 1, 2, 0, tmp_path / "c", timing="model")
    with pytest.raises(TableIntegrityError):
        run_grid(SPACE, split, 1, 2, 1, tmp_path / "c", timing="model")


def test_parallel_matches_serial(split, tmp_path):
    serial = run_grid(SPACE, split, 1, 2, 3, None, jobs=1, timing="model")
    parallel = run_grid(SPACE, split, 1, 2, 3, None, jobs=2, timing="model")
    assert serial.checksum() == parallel.checksum()

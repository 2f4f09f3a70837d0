import numpy as np
import pytest

from tabhpo.space import CATEGORICAL, ORDINAL, ConfigSpace, Hyperparameter
from tabhpo.synthetic import gen_synthetic, heteroscedastic_noise, separable_value

ACCEPTANCE_RESULTS: dict = {}


def small_space():
    """Three parameters, 24 cells, both kinds."""
    return ConfigSpace((
        Hyperparameter("a", ORDINAL, (1, 2, 3, 4)),
        Hyperparameter("b", CATEGORICAL, ("x", "y", "z")),
        Hyperparameter("c", ORDINAL, (0.1, 0.2)),
    ))


@pytest.fixture
def space():
    return small_space()


@pytest.fixture
def small_table():
    sp = small_space()
    return gen_synthetic(sp, separable_value(sp, 1), heteroscedastic_noise(sp, 0.05, 1),
                         n_seeds=4, max_epochs=12, seed=3, dataset_name="small")


@pytest.fixture(scope="session")
def mid_table():
    """1,152-cell table with five parameters; big enough for optimizers to matter."""
    sp = ConfigSpace((
        Hyperparameter("p0", ORDINAL, (0, 1, 2, 3, 4, 5)),
        Hyperparameter("p1", ORDINAL, (0, 1, 2, 3)),
        Hyperparameter("p2", CATEGORICAL, ("u", "v")),
        Hyperparameter("p3", ORDINAL, (0, 1, 2, 3, 4, 5)),
        Hyperparameter("p4", ORDINAL, (0, 1, 2, 3, 4, 5, 6, 7)),
    ))
    return gen_synthetic(sp, separable_value(sp, 2), heteroscedastic_noise(sp, 0.02, 2),
                         n_seeds=4, max_epochs=27, seed=5, dataset_name="mid")


def record_acceptance(key: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS[key] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split()[0])):
        passed, detail = ACCEPTANCE_RESULTS[key]
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[passed]
        terminalreporter.write_line(f"{status}  {key}  {detail}".rstrip())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

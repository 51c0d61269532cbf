import numpy as np
import pytest

from romqoi.config import ExperimentConfig
from romqoi.experiments import BurgersStudy


def baseline_config(**updates):
    cfg = ExperimentConfig()
    return cfg.with_updates(**updates) if updates else cfg


@pytest.fixture(scope="session")
def baseline():
    """n=201, Nt=201, mu=0.1 study with offline stage done."""
    study = BurgersStudy(baseline_config())
    study.offline
    return study


@pytest.fixture(scope="session")
def small_study():
    study = BurgersStudy(baseline_config(**{"model.n_grid": 30, "time.num_steps": 20}))
    study.offline
    return study


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from dejong.generators import random_instance

SEED = 20240611
N_INSTANCES = 50


def make_instances(seed=SEED, count=N_INSTANCES, normalized=True):
    rng = np.random.default_rng(seed)
    return [random_instance(rng, n_max=5, d_max=2, max_support=3, normalized=normalized) for _ in range(count)]


@pytest.fixture(scope="session")
def instances():
    return make_instances()


ACCEPTANCE_LINES: list[str] = []


class Recorder:
    def __call__(self, criterion: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok


@pytest.fixture
def record():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from playstyle.dataset import ActionSpace, PlayDataset


def random_dataset(rng, n, obs_shape=(2, 3, 4), continuous=False, n_actions=5, id="rand"):
    obs = rng.integers(0, 256, size=(n, *obs_shape), dtype=np.uint8)
    if continuous:
        space = ActionSpace.continuous(2)
        actions = rng.normal(size=(n, 2)).astype(np.float32)
    else:
        space = ActionSpace.discrete(n_actions)
        actions = rng.integers(0, n_actions, size=n)
    return PlayDataset(space, obs_shape, obs, actions, id)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one pass/fail line per acceptance criterion, printed after the test run
ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def record_criterion():
    def record(number, passed, detail):
        ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])

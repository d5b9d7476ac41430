import numpy as np
import pytest
from hypothesis import settings

from pacinv.constructions import random_problem

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def small_problem(seed, n_instances=None, n_hypotheses=None):
    r = np.random.default_rng(seed)
    N = n_instances or int(r.integers(2, 7))
    M = n_hypotheses or int(r.integers(1, 16))
    return random_problem(r, N, M, int(r.integers(0, 3)), 3)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

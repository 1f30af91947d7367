import numpy as np
import pytest

from ffrestrict.field import make_field

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def F3():
    return make_field(3)


@pytest.fixture(scope="session")
def F7():
    return make_field(7)


@pytest.fixture(scope="session")
def F11():
    return make_field(11)


@pytest.fixture(scope="session")
def F27():
    return make_field(3, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_points(q, m, rng):
    idx = rng.choice(q * q, size=m, replace=False)
    return np.stack([idx // q, idx % q], axis=1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

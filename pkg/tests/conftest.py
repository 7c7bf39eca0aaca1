import numpy as np
import pytest

from obsdesign.domains import DomainSpec

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def interval():
    return DomainSpec("Interval1D")


@pytest.fixture(scope="session")
def square():
    return DomainSpec("Square2D")


@pytest.fixture(scope="session")
def disk():
    return DomainSpec("Disk2D")

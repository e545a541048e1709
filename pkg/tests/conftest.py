import pytest

from linlab.workload import Workload

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def q11():
    return Workload.queue([1], 1)


@pytest.fixture
def q21():
    return Workload.queue([1, 2], 1)


@pytest.fixture
def q22():
    return Workload.queue([1, 2], 2)


@pytest.fixture
def s11():
    return Workload.stack([1], 1)


@pytest.fixture
def s21():
    return Workload.stack([1, 2], 1)


@pytest.fixture
def s22():
    return Workload.stack([1, 2], 2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

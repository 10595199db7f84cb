import pytest

from cretanlab.designs import DesignParams, DifferenceSet, develop, find_difference_set

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sbibd_13():
    return develop(find_difference_set(DesignParams(13, 4, 1)))


@pytest.fixture(scope="session")
def sbibd_5():
    return develop(DifferenceSet(DesignParams(5, 1, 0), (0,)))


@pytest.fixture(scope="session")
def sbibd_7():
    return develop(DifferenceSet(DesignParams(7, 3, 1), (1, 2, 4)))

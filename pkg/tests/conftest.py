import pytest

from socialcoupon.oracle import ExactEstimator

import helpers


@pytest.fixture
def exact():
    return ExactEstimator()


@pytest.fixture
def gid():
    return helpers.g_id()


@pytest.fixture
def three_seed():
    return helpers.three_seed()


def pytest_terminal_summary(terminalreporter):
    if helpers.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(helpers.ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

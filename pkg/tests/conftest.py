import pytest

from contourchain.chain import LeftPriority, LongCluster, OddEven, RightPriority

ACCEPTANCE_LINES: list[str] = []


def builtin_rules(n):
    rules = [LeftPriority(), RightPriority(), LongCluster()]
    if n % 2 == 0:
        rules.append(OddEven(n))
    return rules


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def left():
    return LeftPriority()


@pytest.fixture
def long_cluster():
    return LongCluster()

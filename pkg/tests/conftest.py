import itertools

import pytest

from strgreedy.problems import (scheduling_constraint, scheduling_objective,
                                table1_matrix)

ACCEPTANCE_LINES = []


@pytest.fixture
def table1():
    m = table1_matrix()
    return scheduling_objective(m), scheduling_constraint(m)


def schedule_value(p, agents):
    """Independent evaluation of the scheduling objective."""
    miss = 1.0
    for stage, i in enumerate(agents):
        miss *= 1.0 - p[i][stage]
    return 1.0 - miss


def brute_schedule(p, K):
    """Best no-repeat agent string of any length 1..K via itertools."""
    N = len(p)
    best, arg = -1.0, None
    for L in range(1, K + 1):
        for perm in itertools.permutations(range(N), L):
            v = schedule_value(p, perm)
            if v > best:
                best, arg = v, perm
    return best, arg


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

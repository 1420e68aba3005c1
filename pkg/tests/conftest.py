from fractions import Fraction

import pytest

from gpupart.gen import make_task
from gpupart.model import MICRO, ExecCurve, Task, TaskSet, TaskType

ACCEPTANCE_LINES = []


def task(tid, a_n, b_n, a_c, b_c, period=100, deadline=None, ttype=TaskType.MEMORY):
    return Task(tid, period, period if deadline is None else deadline, ttype,
                ExecCurve(a_n, b_n), ExecCurve(a_c, b_c))


def gen_task(tid, u, ttype, period=100):
    """Task with the generator's curve shapes, durations in micro-units."""
    return make_task(tid, u, period * MICRO, ttype)


@pytest.fixture
def mergeable_pair():
    # compute a=10 b=0.2 and memory a=10 b=1, T=100 D=75
    return TaskSet((gen_task(0, 0.1, TaskType.COMPUTE), gen_task(1, 0.1, TaskType.MEMORY)), 1)


@pytest.fixture
def unmergeable_pair():
    # compute a=40 b=0.8 and memory a=40 b=4, T=100 D=75
    return TaskSet((gen_task(0, 0.4, TaskType.COMPUTE), gen_task(1, 0.4, TaskType.MEMORY)), 1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

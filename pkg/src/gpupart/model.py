"""Domain types and the contention-aware execution-time model.

Durations are exact rationals. Values loaded from or written to disk are
integer micro-units (``MICRO`` per time unit); in memory any ``int`` or
``Fraction`` works, so small hand-built examples can use plain integers.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

Duration = Union[int, Fraction]

MICRO = 1_000_000
# Hyperperiods above this are rejected rather than silently carried around.
MAX_HYPERPERIOD = 2**63 - 1


class TaskType(str, enum.Enum):
    MEMORY = "memory"
    COMPUTE = "compute"


@dataclass(frozen=True)
class ExecCurve:
    """Execution time ``a / m + b`` on a partition of ``m`` SMs."""

    a: Duration
    b: Duration

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"curve parallel part must be positive, got {self.a}")
        if self.b < 0:
            raise ValueError(f"curve floor must be non-negative, got {self.b}")

    def __call__(self, m: int) -> Fraction:
        return eval_curve(self, m)


def eval_curve(curve: ExecCurve, m: int) -> Fraction:
    if m < 1:
        raise ValueError(f"partition size must be >= 1, got {m}")
    return Fraction(curve.a, m) + curve.b


@dataclass(frozen=True)
class Task:
    id: int
    period: Duration
    deadline: Duration
    ttype: TaskType
    curve_n: ExecCurve
    curve_c: ExecCurve

    def __post_init__(self):
        if not 0 < self.deadline <= self.period:
            raise ValueError(f"task {self.id}: need 0 < D <= T, got D={self.deadline}, T={self.period}")
        # a/m + b is affine in 1/m on (0, 1]; checking both ends covers every m >= 1
        n, c = self.curve_n, self.curve_c
        if c.b < n.b or c.a + c.b < n.a + n.b:
            raise ValueError(f"task {self.id}: conflict curve must dominate the no-conflict curve")

    @property
    def utilization(self) -> Fraction:
        """Baseline utilization a_n / T."""
        return Fraction(self.curve_n.a, self.period)

    @property
    def conflict_factor(self) -> Fraction:
        return Fraction(self.curve_c.a, self.curve_n.a)

    def wcet(self, m: int, conflict: bool) -> Fraction:
        return eval_curve(self.curve_c if conflict else self.curve_n, m)


@dataclass(frozen=True)
class Partition:
    id: int
    m: int
    tasks: frozenset

    def __post_init__(self):
        if self.tasks and self.m < 1:
            raise ValueError(f"partition {self.id} holds tasks but has size {self.m}")


@dataclass(frozen=True)
class TaskSet:
    tasks: tuple
    M: int
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if self.M < 1:
            raise ValueError(f"platform needs at least one SM, got M={self.M}")
        by_id = {t.id: t for t in self.tasks}
        if len(by_id) != len(self.tasks):
            raise ValueError("task ids must be unique")
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self):
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    def __getitem__(self, task_id) -> Task:
        return self._by_id[task_id]

    @property
    def hyperperiod(self) -> int:
        return hyperperiod(self)

    @property
    def utilization(self) -> Fraction:
        return sum((t.utilization for t in self.tasks), Fraction(0))


def has_conflict(task: Task, cohabitants: Iterable[Task]) -> bool:
    return any(o.ttype is task.ttype for o in cohabitants if o.id != task.id)


def conflict_flags(tasks: Iterable[Task]) -> dict:
    """Conflict state of every task of a partition, keyed by task id."""
    tasks = list(tasks)
    counts = {tt: 0 for tt in TaskType}
    for t in tasks:
        counts[t.ttype] += 1
    return {t.id: counts[t.ttype] > 1 for t in tasks}


def wcet_in_partition(task: Task, partition: Partition, all_tasks: TaskSet) -> Fraction:
    if task.id not in partition.tasks:
        raise ValueError(f"task {task.id} is not allocated to partition {partition.id}")
    others = (all_tasks[i] for i in partition.tasks if i != task.id)
    return task.wcet(partition.m, has_conflict(task, others))


def lcm_periods(periods: Iterable) -> int:
    ps = set()
    for p in periods:
        if type(p) is not int:
            p = Fraction(p)
            if p.denominator != 1:
                raise ValueError(f"hyperperiod needs integer periods, got {p}")
            p = p.numerator
        if p <= 0:
            raise ValueError(f"periods must be positive, got {p}")
        ps.add(p)
    h = math.lcm(*ps) if ps else 1
    if h > MAX_HYPERPERIOD:
        raise OverflowError(f"hyperperiod exceeds {MAX_HYPERPERIOD}")
    return h


def hyperperiod(taskset) -> int:
    """LCM of all periods of a TaskSet or any iterable of tasks."""
    return lcm_periods(t.period for t in taskset)

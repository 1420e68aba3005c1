"""Greedy SM partitioning and task allocation with merge heuristics."""
from __future__ import annotations

import bisect
import enum
import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .model import Partition, TaskSet, conflict_flags, lcm_periods
from .sched import edf_demand_test, min_sms_single, necessary_test, scaled_demand_witness


class Order(str, enum.Enum):
    SMS = "SMS"
    BF = "BF"


class ForbiddenMode(str, enum.Enum):
    ACT = "ACT"
    INA = "INA"


class InitialSort(str, enum.Enum):
    DECREASING = "decreasing_utilization"
    INCREASING = "increasing_utilization"


@dataclass(frozen=True)
class HeuristicConfig:
    order: Order = Order.SMS
    forbidden_mode: ForbiddenMode = ForbiddenMode.ACT
    initial_sort: InitialSort = InitialSort.DECREASING
    binary_search: bool = False

    def __post_init__(self):
        object.__setattr__(self, "order", Order(self.order))
        object.__setattr__(self, "forbidden_mode", ForbiddenMode(self.forbidden_mode))
        object.__setattr__(self, "initial_sort", InitialSort(self.initial_sort))

    @property
    def name(self) -> str:
        return f"{self.order.value}_{self.forbidden_mode.value}"


@dataclass
class ForbiddenList:
    """Merges known to fail, as unordered task pairs or partition snapshots."""

    task_pairs: set = field(default_factory=set)
    partition_pairs: set = field(default_factory=set)
    _partners: dict = field(default_factory=dict, repr=False)
    _snapshots: dict = field(default_factory=dict, repr=False)

    def add_task_pair(self, i, j):
        if i == j:
            raise ValueError("a forbidden pair needs two distinct tasks")
        self.task_pairs.add(frozenset((i, j)))
        self._partners.setdefault(i, set()).add(j)
        self._partners.setdefault(j, set()).add(i)

    def add_partition_pair(self, tasks1: frozenset, tasks2: frozenset):
        if tasks1 == tasks2:
            raise ValueError("a forbidden pair needs two distinct partitions")
        self.partition_pairs.add(frozenset((tasks1, tasks2)))
        self._snapshots.setdefault(tasks1, set()).add(tasks2)
        self._snapshots.setdefault(tasks2, set()).add(tasks1)

    def has_task_pair(self, i, j) -> bool:
        return frozenset((i, j)) in self.task_pairs

    def has_partition_pair(self, tasks1, tasks2) -> bool:
        return tasks2 in self._snapshots.get(tasks1, ())

    def snapshots_of(self, tasks) -> set:
        """Task sets of partitions recorded as failing to merge with ``tasks``."""
        return self._snapshots.get(tasks, set())

    def partners_of(self, tasks) -> set:
        out = set()
        for t in tasks:
            out |= self._partners.get(t, set())
        return out

    def __len__(self):
        return len(self.task_pairs) + len(self.partition_pairs)


@dataclass
class Solution:
    partitions: list
    per_task_conflict: dict
    analysis_time: float = 0.0

    @property
    def required_resources(self) -> int:
        return required_resources(self.partitions)


def resolved_entries(tasks, m: int) -> list:
    """(wcet, D, T) triples for ``tasks`` sharing a partition of size ``m``."""
    flags = conflict_flags(tasks)
    return [(t.wcet(m, flags[t.id]), t.deadline, t.period) for t in tasks]


def _scaled_wcets(tasks, m: int):
    """Integer wcets times ``m`` (``a + m * b``), or None for non-integer inputs."""
    flags = conflict_flags(tasks)
    ws = []
    for t in tasks:
        c = t.curve_c if flags[t.id] else t.curve_n
        if type(c.a) is not int or type(c.b) is not int:
            return None
        ws.append(c.a + m * c.b)
    return ws


def _int_timing(tasks):
    ds = [t.deadline for t in tasks]
    ps = [t.period for t in tasks]
    if all(type(x) is int for x in ds) and all(type(x) is int for x in ps):
        return ds, ps
    return None


def partition_schedulable(tasks, m: int) -> bool:
    ws = _scaled_wcets(tasks, m)
    timing = _int_timing(tasks)
    if ws is None or timing is None:
        return edf_demand_test(resolved_entries(tasks, m), m).schedulable
    return scaled_demand_witness(ws, *timing, m) is None


def partition_utilization(P: Partition, taskset: TaskSet) -> Fraction:
    """Sum of conflict-resolved wcet / period over the partition's tasks."""
    tasks = [taskset[i] for i in P.tasks]
    ws = _scaled_wcets(tasks, P.m)
    timing = _int_timing(tasks)
    if ws is None or timing is None:
        return sum((c / p for c, _, p in resolved_entries(tasks, P.m)), Fraction(0))
    ps = timing[1]
    h = lcm_periods(ps)
    return Fraction(sum(w * (h // p) for w, p in zip(ws, ps)), P.m * h)


def required_resources(par_list) -> int:
    return sum(p.m for p in par_list)


def global_test(par_list, M: int) -> bool:
    return required_resources(par_list) <= M


def init_partitions(taskset: TaskSet, config: HeuristicConfig = HeuristicConfig()) -> Optional[list]:
    """One minimally sized partition per task, or None if some task fits nowhere."""
    parts = []
    for t in taskset:
        m = min_sms_single(t, taskset.M)
        if m is None:
            return None
        parts.append(Partition(t.id, m, frozenset((t.id,))))
    utils = {p.id: partition_utilization(p, taskset) for p in parts}
    parts.sort(key=_sort_key(utils, config.initial_sort))
    return parts


def _sort_key(utils, initial_sort):
    if initial_sort is InitialSort.DECREASING:
        return lambda p: (-utils[p.id], p.id)
    return lambda p: (utils[p.id], p.id)


def try_merge(P1: Partition, P2: Partition, taskset: TaskSet, *, binary: bool = False,
              new_id: Optional[int] = None) -> Optional[Partition]:
    """Smallest valid merge of two partitions, or None.

    Sizes are tried from ``max(m1, m2)`` up to ``m1 + m2 - 1``; a merge that
    needs ``m1 + m2`` SMs saves nothing and counts as a failure. The merged
    partition takes ``new_id``, defaulting to the first operand's id.
    """
    tasks3 = P1.tasks | P2.tasks
    members = [taskset[i] for i in sorted(tasks3)]
    lo, hi = max(P1.m, P2.m), P1.m + P2.m - 1
    found = None
    if binary:
        if lo <= hi and partition_schedulable(members, hi):
            while lo < hi:
                mid = (lo + hi) // 2
                if partition_schedulable(members, mid):
                    hi = mid
                else:
                    lo = mid + 1
            found = lo
    else:
        for m in range(lo, hi + 1):
            if partition_schedulable(members, m):
                found = m
                break
    if found is None:
        return None
    return Partition(P1.id if new_id is None else new_id, found, tasks3)


def compare_sms(candidate_merges, taskset: TaskSet):
    """Pick the ((P, P'), merged) entry with the smallest merged partition.

    Ties go to the lower merged utilization, then to the lower partner id.
    """
    if not candidate_merges:
        raise ValueError("compare_sms needs at least one candidate merge")

    best = min(merged.m for _, merged in candidate_merges)
    tied = [e for e in candidate_merges if e[1].m == best]
    if len(tied) == 1:
        return tied[0]
    return min(tied, key=lambda e: (partition_utilization(e[1], taskset), e[0][1].id))


def fill_forbidden_list(taskset: TaskSet, forbidden: Optional[ForbiddenList] = None,
                        binary: bool = False) -> ForbiddenList:
    """Record every task pair whose singleton partitions cannot be merged."""
    forbidden = ForbiddenList() if forbidden is None else forbidden
    singles = []
    for t in taskset:
        m = min_sms_single(t, taskset.M)
        if m is not None:
            singles.append(Partition(t.id, m, frozenset((t.id,))))
    for p, q in itertools.combinations(singles, 2):
        if try_merge(p, q, taskset, binary=binary, new_id=-1) is None:
            forbidden.add_task_pair(p.id, q.id)
    return forbidden


def is_blocked(P: Partition, Q: Partition, forbidden: ForbiddenList, mode: ForbiddenMode,
               partners: Optional[set] = None) -> bool:
    if forbidden.has_partition_pair(P.tasks, Q.tasks):
        return True
    if mode is ForbiddenMode.ACT:
        if partners is None:
            partners = forbidden.partners_of(P.tasks)
        return not partners.isdisjoint(Q.tasks)
    return False


def select_partitions(par_list, forbidden: ForbiddenList, config: HeuristicConfig,
                      taskset: Optional[TaskSet] = None, utils: Optional[dict] = None):
    """First operand in list order with a non-empty eligibility list.

    Returns ``(P, elig_list)`` or None. Under BF the eligible partners are
    sorted by decreasing partition utilization; under SMS they keep list
    order since every merge gets evaluated anyway.
    """
    act = config.forbidden_mode is ForbiddenMode.ACT
    for P in par_list:
        snaps = forbidden.snapshots_of(P.tasks)
        partners = forbidden.partners_of(P.tasks) if act else None
        elig = [Q for Q in par_list
                if Q is not P and Q.tasks not in snaps
                and not (partners and not partners.isdisjoint(Q.tasks))]
        if elig:
            if config.order is Order.BF:
                if utils is None:
                    utils = {Q.id: partition_utilization(Q, taskset) for Q in elig}
                elig.sort(key=lambda Q: (-utils[Q.id], Q.id))
            return P, elig
    return None


def _record_failure(forbidden: ForbiddenList, P, Q, mode: ForbiddenMode):
    if mode is ForbiddenMode.ACT and len(P.tasks) == 1 and len(Q.tasks) == 1:
        # already covered by the prefilled task pairs
        (i,), (j,) = tuple(P.tasks), tuple(Q.tasks)
        forbidden.add_task_pair(i, j)
    else:
        forbidden.add_partition_pair(P.tasks, Q.tasks)


def partition_and_allocate(taskset: TaskSet, config: HeuristicConfig = HeuristicConfig(),
                           on_merge: Optional[Callable] = None) -> Optional[Solution]:
    """Partition the SMs and allocate tasks; None when no allocation is found.

    ``on_merge(P1, P2, P3)`` is called for every committed merge.
    """
    start = time.perf_counter()
    if not necessary_test(taskset):
        return None
    par_list = init_partitions(taskset, config)
    if par_list is None:
        return None
    forbidden = ForbiddenList()
    if config.forbidden_mode is ForbiddenMode.ACT:
        fill_forbidden_list(taskset, forbidden, binary=config.binary_search)

    utils = {p.id: partition_utilization(p, taskset) for p in par_list}
    key = _sort_key(utils, config.initial_sort)
    pi = required_resources(par_list)
    M = taskset.M
    next_id = max((t.id for t in taskset), default=-1) + 1
    while pi > M:
        sel = select_partitions(par_list, forbidden, config, taskset, utils)
        if sel is None:
            return None
        P1, elig = sel
        merged = None
        if config.order is Order.SMS:
            candidates = []
            for P2 in elig:
                P3 = try_merge(P1, P2, taskset, binary=config.binary_search, new_id=next_id)
                if P3 is None:
                    _record_failure(forbidden, P1, P2, config.forbidden_mode)
                else:
                    candidates.append(((P1, P2), P3))
            if candidates:
                (_, P2), merged = compare_sms(candidates, taskset)
        else:
            for P2 in elig:
                P3 = try_merge(P1, P2, taskset, binary=config.binary_search, new_id=next_id)
                if P3 is None:
                    _record_failure(forbidden, P1, P2, config.forbidden_mode)
                else:
                    merged = P3
                    break
        if merged is None:
            continue
        if merged.m >= P1.m + P2.m:
            raise AssertionError("committed merge does not save resources")
        next_id += 1
        if on_merge is not None:
            on_merge(P1, P2, merged)
        par_list = [p for p in par_list if p is not P1 and p is not P2]
        utils[merged.id] = partition_utilization(merged, taskset)
        bisect.insort(par_list, merged, key=key)
        pi += merged.m - P1.m - P2.m

    partitions = sorted(par_list, key=key)
    per_task = {}
    for p in partitions:
        per_task.update(conflict_flags(taskset[i] for i in p.tasks))
    return Solution(partitions, per_task, time.perf_counter() - start)


def one_g(taskset: TaskSet) -> Optional[Solution]:
    """Baseline: the whole GPU as a single partition of M SMs."""
    start = time.perf_counter()
    tasks = list(taskset)
    if tasks and not partition_schedulable(tasks, taskset.M):
        return None
    parts = [Partition(0, taskset.M, frozenset(t.id for t in tasks))] if tasks else []
    return Solution(parts, conflict_flags(tasks), time.perf_counter() - start)

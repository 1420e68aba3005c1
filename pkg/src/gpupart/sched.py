"""Schedulability tests for one partition and for the whole platform.

Each partition runs preemptive EDF. Interference is already folded into the
wcets handed to :func:`edf_demand_test`, so the test itself is the classic
processor-demand criterion for synchronous constrained-deadline tasks.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .model import Task, TaskSet, eval_curve, lcm_periods

Entry = tuple  # (wcet, deadline, period)


@dataclass(frozen=True)
class SchedVerdict:
    schedulable: bool
    witness: Optional[int] = None

    def __bool__(self):
        return self.schedulable


def necessary_test(taskset: TaskSet) -> bool:
    """False when the single-SM load alone exceeds the platform."""
    load = sum((eval_curve(t.curve_n, 1) / t.period for t in taskset), Fraction(0))
    return load <= taskset.M


def _as_int(x) -> int:
    if isinstance(x, Fraction):
        if x.denominator != 1:
            raise ValueError(f"deadlines and periods must be integral, got {x}")
        return x.numerator
    return int(x)


def demand(tasks: Sequence[Entry], t) -> Fraction:
    """Total wcet of jobs released and due within [0, t]."""
    total = Fraction(0)
    for c, d, p in tasks:
        if t >= d:
            total += ((t - d) // p + 1) * c
    return total


def deadline_points(tasks: Sequence[Entry], horizon: int) -> list:
    """Sorted distinct absolute deadlines k*T + D <= horizon."""
    pts = set()
    for _, d, p in tasks:
        pts.update(range(_as_int(d), horizon + 1, _as_int(p)))
    return sorted(pts)


def edf_demand_test(tasks: Sequence[Entry], m: int = 1) -> SchedVerdict:
    """Processor-demand test over the hyperperiod.

    ``m`` is only informational; wcets must already be resolved for the
    partition size.
    """
    if not tasks:
        return SchedVerdict(True)
    cs = [Fraction(c) for c, _, _ in tasks]
    scale = 1
    for c in cs:
        scale = scale * c.denominator // math.gcd(scale, c.denominator)
    ws = [c.numerator * (scale // c.denominator) for c in cs]
    ds = [_as_int(d) for _, d, _ in tasks]
    ps = [_as_int(p) for _, _, p in tasks]
    witness = scaled_demand_witness(ws, ds, ps, scale)
    return SchedVerdict(witness is None, witness)


def _density_at_most(ws, ds, scale) -> bool:
    approx = sum(w / d for w, d in zip(ws, ds))
    if approx < scale * (1 - 1e-9):
        return True
    if approx > scale * (1 + 1e-9):
        return False
    return sum(Fraction(w, d) for w, d in zip(ws, ds)) <= scale


def scaled_demand_witness(ws, ds, ps, scale: int) -> Optional[int]:
    """First deadline where demand exceeds supply, or None if schedulable.

    Integer core of :func:`edf_demand_test`: task ``i`` has wcet
    ``ws[i] / scale``, deadline ``ds[i]`` and period ``ps[i]``. The scan
    stops at ``sum((T - D) * U_i) / (1 - U)`` when ``U < 1``; no violation
    can first appear beyond that point.
    """
    h = lcm_periods(ps)
    load_h = sum(w * (h // p) for w, p in zip(ws, ps))
    cap_h = h * scale
    limit = h
    if load_h <= cap_h:
        # density at most one is sufficient for constrained deadlines
        if _density_at_most(ws, ds, scale):
            return None
        if load_h < cap_h:
            slack_h = sum((p - d) * w * (h // p) for w, d, p in zip(ws, ds, ps))
            limit = min(h, slack_h // (cap_h - load_h))

    heap = [(d, i) for i, d in enumerate(ds) if d <= limit]
    heapq.heapify(heap)
    acc = 0
    while heap:
        t, i = heapq.heappop(heap)
        acc += ws[i]
        nxt = t + ps[i]
        if nxt <= limit:
            heapq.heappush(heap, (nxt, i))
        if heap and heap[0][0] == t:
            continue
        if acc > t * scale:
            return t
    if load_h > cap_h:
        raise AssertionError("overloaded task set produced no demand violation")
    return None


def min_sms_single(task: Task, M: int) -> Optional[int]:
    """Smallest partition size letting the task meet its deadline alone, or None."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    c = task.curve_n
    if c.b > task.deadline:
        return None
    for m in range(1, M + 1):
        if eval_curve(c, m) <= task.deadline:
            return m
    return None


def simulate_edf(tasks: Sequence[Entry], horizon) -> bool:
    """Event-driven preemptive EDF on one resource, synchronous release at 0.

    Returns True iff no job misses its deadline within ``horizon``. Only
    used as an independent oracle for :func:`edf_demand_test`.
    """
    horizon = Fraction(horizon)
    jobs = []  # (abs_deadline, seq, remaining)
    next_release = [Fraction(0)] * len(tasks)
    now = Fraction(0)
    seq = 0
    while True:
        for i, (c, d, p) in enumerate(tasks):
            while next_release[i] <= now and next_release[i] < horizon:
                r = next_release[i]
                heapq.heappush(jobs, (r + d, seq, Fraction(c)))
                seq += 1
                next_release[i] = r + p
        pending = [r for r in next_release if r < horizon]
        upcoming = min(pending) if pending else None
        if not jobs:
            if upcoming is None:
                return True
            now = upcoming
            continue
        dl, s, rem = heapq.heappop(jobs)
        if upcoming is None or now + rem <= upcoming:
            now += rem
            if now > dl:
                return False
        else:
            run = upcoming - now
            now = upcoming
            rem -= run
            if now >= dl and rem > 0:
                return False
            heapq.heappush(jobs, (dl, s, rem))

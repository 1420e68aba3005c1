"""Synthetic taskset generation.

Utilizations come from UUniFast-Discard. When rejection becomes hopeless
(high total utilization over many tasks), sampling switches to Stafford's
RandFixedSum, which draws from the very same distribution: uniform over
the vectors in [0, 1]^n summing to the target.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .model import MICRO, ExecCurve, Task, TaskSet, TaskType, eval_curve

log = logging.getLogger(__name__)

PERIOD_MENU = (50, 100, 200, 400, 500, 1000, 2000, 4000)

# non-parallel floor as a fraction of the baseline execution time
FLOOR_RATIO = {TaskType.COMPUTE: Fraction(2, 100), TaskType.MEMORY: Fraction(1, 10)}
CONFLICT_FACTOR = {TaskType.COMPUTE: Fraction(6, 5), TaskType.MEMORY: Fraction(23, 10)}


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenConfig:
    n: int
    U_total: float
    prm: float = 0.5
    period_menu: tuple = PERIOD_MENU
    deadline_factor: Fraction = Fraction(3, 4)
    seed: int = 0
    unit: int = field(default=MICRO)

    def __post_init__(self):
        object.__setattr__(self, "period_menu", tuple(self.period_menu))
        object.__setattr__(self, "deadline_factor", Fraction(self.deadline_factor))
        if self.n < 0:
            raise ValueError(f"task count must be >= 0, got {self.n}")
        if not 0 <= self.prm <= 1:
            raise ValueError(f"prm must lie in [0, 1], got {self.prm}")
        if not 0 < self.deadline_factor <= 1:
            raise ValueError(f"deadline factor must lie in (0, 1], got {self.deadline_factor}")
        if self.U_total < 0 or self.U_total > self.n:
            raise ValueError(f"total utilization {self.U_total} infeasible for {self.n} tasks")
        if not self.period_menu or list(self.period_menu) != sorted(self.period_menu):
            raise ValueError("period menu must be non-empty and ascending")


def uunifast(n: int, U: float, rng: np.random.Generator) -> np.ndarray:
    out = np.empty(n)
    remaining = U
    for i in range(n - 1):
        nxt = remaining * rng.random() ** (1.0 / (n - 1 - i))
        out[i] = remaining - nxt
        remaining = nxt
    out[n - 1] = remaining
    return out


def randfixedsum(n: int, s: float, rng: np.random.Generator) -> np.ndarray:
    """One vector uniform on {x in [0, 1]^n : sum(x) = s} (Stafford 2006)."""
    k = int(max(min(np.floor(s), n - 1), 0))
    s = max(min(s, k + 1), k)
    s1 = s - np.arange(k, k - n, -1, dtype=float)
    s2 = np.arange(k + n, k, -1, dtype=float) - s
    w = np.zeros((n, n + 1))
    w[0, 1] = np.finfo(float).max
    t = np.zeros((n - 1, n))
    tiny = np.finfo(float).tiny
    for i in range(2, n + 1):
        tmp1 = w[i - 2, 1:i + 1] * s1[:i] / i
        tmp2 = w[i - 2, :i] * s2[n - i:] / i
        w[i - 1, 1:i + 1] = tmp1 + tmp2
        tmp3 = w[i - 1, 1:i + 1] + tiny
        tmp4 = s2[n - i:] > s1[:i]
        t[i - 2, :i] = np.where(tmp4, tmp2 / tmp3, 1 - tmp1 / tmp3)
    x = np.zeros(n)
    j = k  # 0-based column of the transition table
    sm, pr = 0.0, 1.0
    for i in range(n - 1, 0, -1):
        e = rng.random() <= t[i - 1, j]
        sx = rng.random() ** (1.0 / i)
        sm += (1 - sx) * pr * s / (i + 1)
        pr *= sx
        x[n - 1 - i] = sm + pr * e
        s -= e
        j -= e
    x[n - 1] = sm + pr * s
    return rng.permutation(x)


def uunifast_discard(n: int, U_total: float, rng: np.random.Generator,
                     max_attempts: int = 1000) -> list:
    """n utilizations, each at most 1, summing to ``U_total``."""
    if n < 1:
        raise ValueError(f"need at least one task, got n={n}")
    if U_total < 0 or U_total > n:
        raise ValueError(f"total utilization {U_total} infeasible for {n} tasks")
    if U_total == n:
        return [1.0] * n
    for _ in range(max_attempts):
        u = uunifast(n, U_total, rng)
        if u.max() <= 1.0:
            return u.tolist()
    u = np.clip(randfixedsum(n, U_total, rng), 0.0, 1.0)
    # spread the residual rounding over the entries with room for it
    resid = U_total - u.sum()
    room = (1.0 - u) if resid > 0 else u
    if room.sum() > 0:
        u = u + resid * room / room.sum()
    return u.tolist()


def scale_duration(x: Fraction) -> int:
    return int(round(x))


def make_task(task_id: int, u: float, period: int, ttype: TaskType,
              deadline_factor: Fraction = Fraction(3, 4)) -> Task:
    """Task with baseline execution ``u * period`` and the generator's curve shapes.

    ``period`` is in the caller's integer time unit; every derived duration is
    rounded to that unit.
    """
    a = scale_duration(Fraction(u) * period)
    b = scale_duration(FLOOR_RATIO[ttype] * a)
    k = CONFLICT_FACTOR[ttype]
    if a < 1:
        raise ValueError(f"baseline execution time below one unit (u={u}, T={period})")
    return Task(
        id=task_id,
        period=period,
        deadline=scale_duration(deadline_factor * period),
        ttype=ttype,
        curve_n=ExecCurve(a, b),
        curve_c=ExecCurve(scale_duration(k * a), scale_duration(k * b)),
    )


def reasonable(u: float, period: int, M: int, deadline_factor: Fraction, ttype: TaskType) -> bool:
    """An execution time is acceptable if the task meets its deadline on all M SMs."""
    a = scale_duration(Fraction(u) * period)
    if a < 1:
        return False
    b = scale_duration(FLOOR_RATIO[ttype] * a)
    return eval_curve(ExecCurve(a, b), M) <= scale_duration(deadline_factor * period)


def generate_taskset(config: GenConfig, M: int, rng=None, max_retries: int = 100) -> TaskSet:
    """Random taskset on a platform of ``M`` SMs, fully determined by ``config.seed``."""
    rng = np.random.default_rng(config.seed) if rng is None else rng
    if config.n == 0:
        return TaskSet((), M)
    menu = [p * config.unit for p in config.period_menu]
    for _ in range(max_retries):
        utils = uunifast_discard(config.n, config.U_total, rng)
        tasks = []
        for i, u in enumerate(utils):
            idx = int(rng.integers(len(menu)))
            ttype = TaskType.MEMORY if rng.random() < config.prm else TaskType.COMPUTE
            while idx < len(menu) and not reasonable(u, menu[idx], M, config.deadline_factor, ttype):
                idx += 1
            if idx == len(menu):
                break
            tasks.append(make_task(i, u, menu[idx], ttype, config.deadline_factor))
        else:
            return TaskSet(tuple(tasks), M)
        log.debug("task infeasible at the largest period, redrawing utilizations")
    raise GenerationError(f"no feasible taskset after {max_retries} draws")

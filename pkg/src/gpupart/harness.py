"""Experiment sweeps over total utilization and their aggregated metrics."""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .gen import GenConfig, GenerationError, generate_taskset
from .model import TaskSet
from .partitioner import HeuristicConfig, Solution, one_g, partition_and_allocate
from .sched import necessary_test

log = logging.getLogger(__name__)

ALL_VARIANTS = ("1G", "SMS_ACT", "SMS_INA", "BF_ACT", "BF_INA")


def heuristic_for(variant: str) -> Optional[HeuristicConfig]:
    """HeuristicConfig of a variant label; None for the 1G baseline."""
    if variant == "1G":
        return None
    order, mode = variant.split("_")
    return HeuristicConfig(order, mode)


@dataclass(frozen=True)
class SweepConfig:
    M: int = 68
    n_tasks: int = 50
    prm: float = 0.5
    U_min: float = 2
    U_max: float = 68
    U_step: float = 2
    reps: int = 100
    variants: tuple = ALL_VARIANTS
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variants", tuple(self.variants))
        if self.U_min > self.U_max:
            raise ValueError("U_min must not exceed U_max")
        if self.U_step <= 0:
            raise ValueError("U_step must be positive")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        for v in self.variants:
            if v != "1G":
                heuristic_for(v)

    def grid(self) -> list:
        k = int(math.floor((self.U_max - self.U_min) / self.U_step + 1e-9))
        return [round(self.U_min + i * self.U_step, 9) for i in range(k + 1)]


@dataclass
class SweepRow:
    variant: str
    U_nominal: float
    sched_rate: float
    eff_lower: float
    eff_upper: float
    eff_achieved: float
    avg_partitions: float
    avg_analysis_time: float  # seconds


@dataclass
class Outcome:
    solved: bool
    partitions: int = 0
    efficiency: tuple = (math.nan, math.nan, math.nan)
    analysis_time: float = 0.0


@dataclass
class Instance:
    U: float
    rep: int
    seed: int
    generated: bool
    necessary_ok: bool = False
    outcomes: dict = field(default_factory=dict)


def efficiency(solution: Solution, taskset: TaskSet) -> tuple:
    """(lower, upper, achieved) scheduled load from baseline utilizations."""
    lower = upper = achieved = Fraction(0)
    for t in taskset:
        u = t.utilization
        k = t.conflict_factor
        lower += u
        upper += k * u
        achieved += k * u if solution.per_task_conflict[t.id] else u
    return lower, upper, achieved


def instance_seed(base_seed: int, U: float, rep: int) -> int:
    ss = np.random.SeedSequence([int(base_seed), int(round(U * 1_000_000)), int(rep)])
    return int(ss.generate_state(1, np.uint64)[0])


def run_variant(variant: str, taskset: TaskSet) -> Outcome:
    cfg = heuristic_for(variant)
    start = time.perf_counter()
    sol = one_g(taskset) if cfg is None else partition_and_allocate(taskset, cfg)
    elapsed = time.perf_counter() - start
    if sol is None:
        return Outcome(False, analysis_time=elapsed)
    eff = tuple(float(x) for x in efficiency(sol, taskset))
    return Outcome(True, len(sol.partitions), eff, elapsed)


def run_instance(config: SweepConfig, U: float, rep: int) -> Instance:
    seed = instance_seed(config.base_seed, U, rep)
    try:
        ts = generate_taskset(GenConfig(config.n_tasks, U, config.prm, seed=seed), config.M)
    except GenerationError:
        log.warning("generation failed at U=%s rep=%d", U, rep)
        return Instance(U, rep, seed, False,
                        outcomes={v: Outcome(False) for v in config.variants})
    inst = Instance(U, rep, seed, True, necessary_test(ts))
    for v in config.variants:
        inst.outcomes[v] = run_variant(v, ts)
    return inst


def _run_unit(args):
    return run_instance(*args)


def sweep_instances(config: SweepConfig, jobs: int = 1) -> list:
    """Every (U, rep) instance of the sweep, in grid order."""
    units = []
    for U in config.grid():
        if U > config.n_tasks:
            log.warning("skipping U=%s: exceeds the task count %d", U, config.n_tasks)
            continue
        units.extend((config, U, rep) for rep in range(config.reps))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            out = list(ex.map(_run_unit, units, chunksize=4))
    else:
        out = [_run_unit(u) for u in units]
    return sorted(out, key=lambda i: (i.U, i.rep))


def _mean(xs):
    return sum(xs) / len(xs) if xs else math.nan


def aggregate(config: SweepConfig, instances: list) -> list:
    rows = []
    by_u = {}
    for inst in instances:
        by_u.setdefault(inst.U, []).append(inst)
    for v in config.variants:
        for U in sorted(by_u):
            outs = [i.outcomes[v] for i in by_u[U]]
            ok = [o for o in outs if o.solved]
            rows.append(SweepRow(
                variant=v,
                U_nominal=U,
                sched_rate=len(ok) / len(outs),
                eff_lower=_mean([o.efficiency[0] for o in ok]),
                eff_upper=_mean([o.efficiency[1] for o in ok]),
                eff_achieved=_mean([o.efficiency[2] for o in ok]),
                avg_partitions=_mean([o.partitions for o in ok]),
                avg_analysis_time=_mean([o.analysis_time for o in outs]),
            ))
    return rows


def run_sweep(config: SweepConfig, jobs: int = 1) -> list:
    return aggregate(config, sweep_instances(config, jobs))


def dominance_flags(rows: list) -> list:
    """(variant, U) points where a partitioned variant schedules less than 1G."""
    base = {r.U_nominal: r.sched_rate for r in rows if r.variant == "1G"}
    return [(r.variant, r.U_nominal) for r in rows
            if r.variant != "1G" and r.U_nominal in base and r.sched_rate < base[r.U_nominal]]

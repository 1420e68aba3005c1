"""Contention-aware partitioning of GPU streaming multiprocessors."""
from .model import MICRO, ExecCurve, Partition, Task, TaskSet, TaskType, eval_curve, has_conflict, hyperperiod, wcet_in_partition
from .partitioner import (ForbiddenList, ForbiddenMode, HeuristicConfig, InitialSort, Order, Solution,
                          partition_and_allocate, one_g)
from .sched import SchedVerdict, edf_demand_test, min_sms_single, necessary_test, simulate_edf
from .gen import GenConfig, generate_taskset
from .harness import SweepConfig, run_sweep

__version__ = "0.1.0"

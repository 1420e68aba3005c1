"""Command-line entry point and file formats.

Exit codes: 0 success / schedulable, 1 error, 2 not schedulable (``analyze``)
or usage error (argparse), 3 ``selftest`` disagreement.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from .gen import GenConfig, GenerationError, generate_taskset
from .harness import ALL_VARIANTS, SweepConfig, dominance_flags, efficiency, heuristic_for, sweep_instances, aggregate
from .model import ExecCurve, Task, TaskSet, TaskType, lcm_periods
from .partitioner import one_g, partition_and_allocate
from .sched import edf_demand_test, simulate_edf

log = logging.getLogger("gpupart")

DAT_COLUMNS = ("U_nominal", "sched_rate", "eff_lower", "eff_upper", "eff_achieved",
               "avg_partitions", "avg_time_ms")


def _int_duration(x, what):
    x = Fraction(x)
    if x.denominator != 1:
        raise ValueError(f"{what} must be an integer number of micro-units, got {x}")
    return x.numerator


def taskset_to_dict(ts: TaskSet) -> dict:
    return {
        "M": ts.M,
        "tasks": [
            {
                "id": t.id,
                "period": _int_duration(t.period, "period"),
                "deadline": _int_duration(t.deadline, "deadline"),
                "type": t.ttype.value,
                "a_n": _int_duration(t.curve_n.a, "a_n"),
                "b_n": _int_duration(t.curve_n.b, "b_n"),
                "a_c": _int_duration(t.curve_c.a, "a_c"),
                "b_c": _int_duration(t.curve_c.b, "b_c"),
            }
            for t in ts
        ],
    }


def taskset_from_dict(doc: dict) -> TaskSet:
    tasks = []
    for rec in doc["tasks"]:
        vals = {k: rec[k] for k in ("id", "period", "deadline", "a_n", "b_n", "a_c", "b_c")}
        for k, v in vals.items():
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValueError(f"field {k!r} of task {rec.get('id')} must be an integer")
        tasks.append(Task(
            id=vals["id"],
            period=vals["period"],
            deadline=vals["deadline"],
            ttype=TaskType(rec["type"]),
            curve_n=ExecCurve(vals["a_n"], vals["b_n"]),
            curve_c=ExecCurve(vals["a_c"], vals["b_c"]),
        ))
    M = doc["M"]
    if not isinstance(M, int):
        raise ValueError("M must be an integer")
    return TaskSet(tuple(tasks), M)


def save_taskset(ts: TaskSet, path) -> None:
    Path(path).write_text(json.dumps(taskset_to_dict(ts), indent=1) + "\n")


def load_taskset(path) -> TaskSet:
    return taskset_from_dict(json.loads(Path(path).read_text()))


def _fmt(x) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.6f}"


def format_dat(rows) -> str:
    lines = ["# " + " ".join(DAT_COLUMNS)]
    for r in rows:
        vals = (r.U_nominal, r.sched_rate, r.eff_lower, r.eff_upper, r.eff_achieved,
                r.avg_partitions, r.avg_analysis_time * 1000.0)
        lines.append(" ".join(_fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


def write_dat(rows, path) -> None:
    Path(path).write_text(format_dat(rows))


def read_dat(path) -> list:
    out = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        out.append(dict(zip(DAT_COLUMNS, (float(v) for v in line.split()))))
    return out


def _seed(args) -> int:
    env = os.environ.get("GPUPART_SEED")
    return int(env) if env is not None else args.seed


# ---- verbs -----------------------------------------------------------------

def cmd_generate(args, parser) -> int:
    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
    n = args.tasks if args.tasks is not None else cfg.get("n")
    util = args.util if args.util is not None else cfg.get("U_total")
    prm = args.prm if args.prm is not None else cfg.get("prm", 0.5)
    M = args.sms if args.sms is not None else cfg.get("M", 68)
    if n is None or util is None:
        parser.error("--tasks and --util are required (or give them in --config)")
    if n < 1 or util < 0 or util > n:
        parser.error(f"--util must lie in [0, --tasks]; got util={util}, tasks={n}")
    if not 0 <= prm <= 1:
        parser.error("--prm must lie in [0, 1]")
    if M < 1:
        parser.error("--sms must be >= 1")
    seed = _seed(args) if args.seed is not None or "GPUPART_SEED" in os.environ else cfg.get("seed", 0)
    gcfg = GenConfig(n, util, prm, seed=seed,
                     **{k: cfg[k] for k in ("period_menu", "deadline_factor") if k in cfg})
    try:
        ts = generate_taskset(gcfg, M)
    except GenerationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    save_taskset(ts, args.out)
    print(f"{args.out} sum_u={float(ts.utilization):.9f}")
    return 0


def cmd_analyze(args, parser) -> int:
    try:
        ts = load_taskset(args.taskset)
    except (OSError, ValueError, KeyError, TypeError) as e:
        print(f"error: cannot load {args.taskset}: {e}", file=sys.stderr)
        return 1
    if args.heuristic == "1g":
        sol = one_g(ts)
        label = "1G"
    else:
        cfg = heuristic_for(f"{args.heuristic.upper()}_{args.forbidden.upper()}")
        cfg = dataclasses.replace(cfg, binary_search=args.binary_search)
        sol = partition_and_allocate(ts, cfg)
        label = cfg.name
    if sol is None:
        print(f"{label}: NOT SCHEDULABLE")
        return 2
    print(f"{label}: SCHEDULABLE")
    for p in sol.partitions:
        members = " ".join(str(i) for i in sorted(p.tasks))
        print(f"  partition {p.id}: {p.m} SMs, tasks [{members}]")
    lo, hi, got = efficiency(sol, ts)
    print(f"Pi = {sol.required_resources} / M = {ts.M}")
    print(f"efficiency lower={float(lo):.6f} upper={float(hi):.6f} achieved={float(got):.6f}")
    print(f"analysis time {sol.analysis_time * 1000:.3f} ms")
    return 0


def _sweep_config(args) -> SweepConfig:
    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
    overrides = {
        "M": args.sms, "n_tasks": args.tasks, "prm": args.prm, "U_min": args.u_min,
        "U_max": args.u_max, "U_step": args.u_step, "reps": args.reps,
        "variants": args.variants.split(",") if args.variants else None,
        "base_seed": _seed(args) if args.seed is not None or "GPUPART_SEED" in os.environ else None,
    }
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return SweepConfig(**cfg)


def cmd_sweep(args, parser) -> int:
    try:
        config = _sweep_config(args)
    except (ValueError, TypeError) as e:
        parser.error(str(e))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    instances = sweep_instances(config, jobs=args.jobs)
    rows = aggregate(config, instances)
    for v in config.variants:
        write_dat([r for r in rows if r.variant == v], out / f"{v}.dat")
    flags = dominance_flags(rows)
    for v, U in flags:
        log.warning("dominance flag: %s below 1G at U=%s", v, U)
    summary = {
        "config": dataclasses.asdict(config),
        "instances": len(instances),
        "generation_failures": sum(not i.generated for i in instances),
        "necessary_test_rejections": sum(i.generated and not i.necessary_ok for i in instances),
        "dominance_flags": flags,
        "rows": [dataclasses.asdict(r) for r in rows],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1, default=str) + "\n")
    print(f"wrote {len(config.variants)} .dat files and summary.json to {out}")
    return 0


def random_small_instance(rng: random.Random, max_tasks: int = 6, max_h: int = 10_000) -> list:
    """(wcet, D, T) entries with hyperperiod <= max_h and a mix of loads."""
    periods = [p for p in range(2, 201) if max_h % p == 0]
    n = rng.randint(1, max_tasks)
    target = rng.choice([0.5, 0.8, 0.95, 1.0, 1.05, 1.3])
    entries = []
    while len(entries) < n:
        T = rng.choice(periods)
        if lcm_periods([e[2] for e in entries] + [T]) > max_h:
            continue
        D = rng.randint(max(1, T // 4), T)
        c = Fraction(rng.randint(1, 1000), 1000) * Fraction(target * T / n).limit_denominator(100)
        entries.append((max(c, Fraction(1, 1000)), D, T))
    return entries


def selftest(instances: int = 1000, seed: int = 0) -> int:
    """Number of disagreements between the demand test and EDF simulation."""
    rng = random.Random(seed)
    bad = 0
    for _ in range(instances):
        ents = random_small_instance(rng)
        h = lcm_periods(e[2] for e in ents)
        if edf_demand_test(ents).schedulable != simulate_edf(ents, h):
            bad += 1
            log.error("disagreement on %s", ents)
    return bad


def cmd_selftest(args, parser) -> int:
    bad = selftest(args.instances, _seed(args))
    print(f"selftest: {args.instances} instances, {bad} disagreements")
    return 0 if bad == 0 else 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gpupart", description="Contention-aware GPU SM partitioning")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("generate", help="write a random taskset")
    g.add_argument("--tasks", type=int)
    g.add_argument("--util", type=float)
    g.add_argument("--prm", type=float)
    g.add_argument("--sms", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--config", help="JSON generator config (n, U_total, prm, M, seed, ...)")
    g.add_argument("--out", required=True)

    a = sub.add_parser("analyze", help="partition and allocate a taskset file")
    a.add_argument("taskset")
    a.add_argument("--heuristic", choices=("1g", "sms", "bf"), default="sms")
    a.add_argument("--forbidden", choices=("act", "ina"), default="act")
    a.add_argument("--binary-search", action="store_true")

    s = sub.add_parser("sweep", help="run a utilization sweep and write .dat files")
    s.add_argument("--config", help="JSON sweep config with SweepConfig field names")
    s.add_argument("--sms", type=int)
    s.add_argument("--tasks", type=int)
    s.add_argument("--prm", type=float)
    s.add_argument("--u-min", type=float)
    s.add_argument("--u-max", type=float)
    s.add_argument("--u-step", type=float)
    s.add_argument("--reps", type=int)
    s.add_argument("--variants", help=f"comma list from {','.join(ALL_VARIANTS)}")
    s.add_argument("--seed", type=int)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out-dir", default="results")

    t = sub.add_parser("selftest", help="check the demand test against EDF simulation")
    t.add_argument("--instances", type=int, default=1000)
    t.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    verbs = {"generate": cmd_generate, "analyze": cmd_analyze,
             "sweep": cmd_sweep, "selftest": cmd_selftest}
    return verbs[args.verb](args, parser)


if __name__ == "__main__":
    sys.exit(main())

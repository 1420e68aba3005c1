#!/usr/bin/env python3
"""Time every variant on one generated taskset and print a small table."""
import argparse

from gpupart.gen import GenConfig, generate_taskset
from gpupart.harness import ALL_VARIANTS, efficiency, run_variant


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tasks", type=int, default=50)
    ap.add_argument("--util", type=float, default=30.0)
    ap.add_argument("--prm", type=float, default=0.5)
    ap.add_argument("--sms", type=int, default=68)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    ts = generate_taskset(GenConfig(args.tasks, args.util, args.prm, seed=args.seed), args.sms)
    print(f"{'variant':8} {'ok':>3} {'parts':>5} {'eff':>8} {'ms':>9}")
    for v in ALL_VARIANTS:
        o = run_variant(v, ts)
        eff = f"{float(o.efficiency[2]):8.3f}" if o.solved else "       -"
        print(f"{v:8} {'yes' if o.solved else 'no':>3} {o.partitions:5d} {eff} {1e3 * o.analysis_time:9.2f}")


if __name__ == "__main__":
    main()

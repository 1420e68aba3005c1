#!/usr/bin/env python3
"""Regenerate the schedulability, efficiency and timing curves.

Writes one directory per experiment under ``--out`` with a .dat file per
variant (columns as in ``gpupart.cli.DAT_COLUMNS``) and a summary.json.

    python3 scripts/run_sweeps.py --out results --reps 100
"""
import argparse
import logging
from pathlib import Path

from gpupart.cli import main as cli_main

EXPERIMENTS = {
    # name: (tasks, prm, u_step)
    "n50_prm50": (50, 0.5, 2),
    "n50_prm30": (50, 0.3, 2),
    "n200_prm50": (200, 0.5, 4),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=sorted(EXPERIMENTS), help="subset of experiments")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    for name in args.only or EXPERIMENTS:
        n, prm, step = EXPERIMENTS[name]
        logging.info("running %s", name)
        rc = cli_main(["sweep", "--tasks", str(n), "--prm", str(prm), "--sms", "68",
                       "--u-min", str(step), "--u-max", "68", "--u-step", str(step),
                       "--reps", str(args.reps), "--seed", str(args.seed), "--jobs", str(args.jobs),
                       "--out-dir", str(Path(args.out) / name)])
        if rc:
            return rc
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

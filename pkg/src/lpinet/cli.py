"""Command-line experiment runner.

    lpinet run --config <path> [--sweep <path>] [--out <dir>] [--workers N] [--seed S]
    lpinet validate --config <path>

Output directory precedence: --out, then $LPINET_OUT, then run.out_dir from
the config, then ./out. Exit codes: 0 success, 1 configuration error, 2 one
or more runs failed.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, load_config, with_seed
from .sweep import SweepSpec, execute, expand_sweep, load_sweep


def _build_parser():
    parser = argparse.ArgumentParser(prog="lpinet")
    sub = parser.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="execute a run or a sweep of runs")
    run.add_argument("--config", required=True, help="run config file")
    run.add_argument("--sweep", help="sweep file (value lists per sweepable key)")
    run.add_argument("--out", help="output directory")
    run.add_argument("--workers", type=int, default=1, help="concurrent runs (default 1)")
    run.add_argument("--seed", type=int, help="override run.seed")

    val = sub.add_parser("validate", help="parse and validate a config, then exit")
    val.add_argument("--config", required=True, help="run config file")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.verb == "validate":
        print(f"config OK: {args.config}")
        return 0

    if args.seed is not None:
        cfg = with_seed(cfg, args.seed)
    sweep = SweepSpec()
    if args.sweep:
        try:
            sweep = load_sweep(args.sweep)
        except (ConfigError, OSError) as exc:
            print(f"sweep error: {exc}", file=sys.stderr)
            return 1
    try:
        runs = expand_sweep(cfg, sweep)
    except ConfigError as exc:
        print(f"sweep error: {exc}", file=sys.stderr)
        return 1

    out_dir = args.out or os.environ.get("LPINET_OUT") or cfg.out_dir or "./out"
    print(f"{len(runs)} runs -> {out_dir} (workers={args.workers})")
    result = execute(runs, args.workers, out_dir)
    for rep in sorted(result.reports, key=lambda r: r.run_id):
        if rep.failed:
            print(f"  {rep.run_id}: FAILED {rep.fail_reason}")
        else:
            print(f"  {rep.run_id}: energy={rep.energy_j:.6g} J "
                  f"makespan={rep.makespan_ns} ns pauses={rep.pause_events}")
    print(f"wrote {result.csv_path}")
    print(f"wrote {result.json_path}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())

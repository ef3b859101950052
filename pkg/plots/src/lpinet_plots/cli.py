"""CLI: plots --csv <path> --out <dir> [--format png|svg]"""

from __future__ import annotations

import argparse
import sys

from .figures import PlotsError, render


def main(argv=None):
    parser = argparse.ArgumentParser(prog="plots")
    parser.add_argument("--csv", required=True, help="sweep results CSV")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    args = parser.parse_args(argv)
    try:
        results = render(args.csv, args.out, fmt=args.format)
    except PlotsError as exc:
        print(f"plots error: {exc}", file=sys.stderr)
        return 1
    for res in results:
        print(f"wrote {res.path} ({res.n_bars} bars in {res.n_groups} groups)")
    return 0


if __name__ == "__main__":
    sys.exit(main())

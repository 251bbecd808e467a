"""Run every CLI command with the configs in scripts/configs.

    python scripts/run_suite.py --out runs/default [--workers 4] [--fixed-timestamp]

Exits with the largest exit code of the individual commands.
"""

import argparse
import os
import sys

from fbmlocal import cli

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--fixed-timestamp", action="store_true")
    args = ap.parse_args()
    worst = 0
    for command in ("verify", "simulate", "localtime", "scaling", "converge"):
        cfg = os.path.join(HERE, "configs", f"{command}.json")
        print(f"== {command}")
        code, _ = cli.run(command, cfg, os.path.join(args.out, command), args.workers, args.fixed_timestamp)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Run every sum-rule check on both models and print the reports.

Thin driver over the CLI: box rules over an n grid, delta-well rules
over a q grid, then both Stark comparisons.  Exit status is the worst
of the individual runs, so `python scripts/run_all_checks.py && echo ok`
is a one-line health check.
"""

import argparse
import sys

sys.path.insert(0, "src")

from sumrules.cli import main as cli_main  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", default="1..10", help="box quantum numbers")
    parser.add_argument("--q", default="0.1,0.5,1,2,5,10",
                        help="Bethe momentum transfers")
    parser.add_argument("--tol", default="1e-9")
    parser.add_argument("--format", dest="fmt", default="text",
                        choices=("text", "json", "csv"))
    args = parser.parse_args()

    batches = [
        ["verify", "--model", "isw", "--n", args.n],
        ["verify", "--model", "delta", "--q", args.q],
        ["stark", "--model", "isw", "--n", args.n],
        ["stark", "--model", "delta"],
    ]
    worst = 0
    for batch in batches:
        print(f"$ sumrules {' '.join(batch)}")
        worst = max(worst, cli_main(batch + ["--tol", args.tol,
                                             "--format", args.fmt]))
        print()
    return worst


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Generate a grid of desk-scale instances, solve each heuristically and with
the exact oracle, and print the quality table.

Usage: python scripts/small_vs_oracle.py [--count N] [--seed S] [--out results.csv]
"""

import argparse
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fixnet import bench, probio  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=5, help="instances per size")
    ap.add_argument("--seed", type=int, default=9000)
    ap.add_argument("--out", default=None, help="CSV path (default stdout)")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        idx = 0
        for m, n in [(4, 4), (5, 5), (6, 6)]:
            for _ in range(args.count):
                spec = probio.FctpSpec(
                    sources=m, sinks=n, total_supply=100 * m,
                    fc_range=(50, 200), fc_count=12, seed=args.seed + idx,
                )
                idx += 1
                problem = probio.generate_fctp(spec)
                path = Path(tmp) / f"small_{m}x{n}_{idx}.fcnf"
                path.write_text(probio.write_fcnf(problem))
        argv = ["bench", tmp, "--oracle", "--max-fc-arcs", "14"]
        if args.out:
            argv += ["--output", args.out]
        return bench.main(argv)


if __name__ == "__main__":
    raise SystemExit(main())

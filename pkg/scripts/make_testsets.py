#!/usr/bin/env python3
"""Write both benchmark suites to disk.

Usage: python scripts/make_testsets.py [--root instances] [--seed S] [--count N]

testset1/ holds the dense transportation grid (7 shapes x charge types A-H x
count); testset2/ the 96-instance full-factorial transshipment design.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fixnet import bench  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--root", default="instances")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=1, help="testset1 instances per cell")
    args = ap.parse_args()

    rc = bench.main([
        "generate", "--suite", "testset1", "--count", str(args.count),
        "--seed", str(args.seed), "--out-dir", str(Path(args.root) / "testset1"),
    ])
    if rc:
        return rc
    return bench.main([
        "generate", "--suite", "testset2",
        "--seed", str(args.seed), "--out-dir", str(Path(args.root) / "testset2"),
    ])


if __name__ == "__main__":
    raise SystemExit(main())

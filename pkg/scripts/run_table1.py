#!/usr/bin/env python3
"""Coverage-probability study for the scalar sine scenario (Example 1):
all four estimators across sample sizes and interval widths.

Writes one CSV per sample size plus a JSON config echo next to it.
"""

import argparse
import pathlib
import subprocess
import sys


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results/table1")
    ap.add_argument("--sizes", default="200,400,800")
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=20240801)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for n in (int(s) for s in args.sizes.split(",")):
        out = outdir / f"coverage_n{n}.csv"
        cmd = [sys.executable, "-m", "modalreg.cli", "coverage",
               "--scenario", "example1", "--n", str(n),
               "--reps", str(args.reps), "--widths", "0.1,0.2,0.5",
               "--seed", str(args.seed), "--threads", str(args.threads),
               "--output", str(out)]
        print("->", out)
        code = subprocess.call(cmd)
        if code:
            return code
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

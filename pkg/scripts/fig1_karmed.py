"""Regret and bound trends for the 10-armed Gaussian bandit as sigma0 and the prior gap vary.

    python3 scripts/fig1_karmed.py [--runs N] [--out DIR]

Writes out/gaussian_sigma0/ and out/gaussian_gap/ (sweep.csv, sweep.svg).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from bayesucb.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(runs: int | None, out: str, configs=("gaussian_sigma0_sweep", "gaussian_gap_sweep")) -> int:
    for name in configs:
        args = ["sweep", "--config", str(CONFIGS / f"{name}.cfg"),
                "--out", str(Path(out) / name.replace("_sweep", ""))]
        if runs:
            args += ["--runs", str(runs)]
        code = main(args)
        if code:
            return code
        print(f"wrote {Path(out) / name.replace('_sweep', '')}")
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, help="override the 10 000 runs per grid point")
    ap.add_argument("--out", default="out")
    a = ap.parse_args()
    sys.exit(run(a.runs, a.out))

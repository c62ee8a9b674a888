"""Regret and bound trends for the 10-dimensional linear bandit as sigma0 and the prior gap vary.

    python3 scripts/fig2_linear.py [--runs N] [--out DIR]
"""

from __future__ import annotations

import argparse
import sys

from fig1_karmed import run

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, help="override the 1000 runs per grid point")
    ap.add_argument("--out", default="out")
    a = ap.parse_args()
    sys.exit(run(a.runs, a.out, ("linear_sigma0_sweep", "linear_gap_sweep")))

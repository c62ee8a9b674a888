"""Evaluate every applicable bound for each shipped config and print the table.

    python3 scripts/check_bounds.py [--out DIR]
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from bayesucb.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/bounds")
    a = ap.parse_args()
    for name in ("gaussian", "bernoulli", "linear"):
        out = Path(a.out) / name
        if main(["bounds", "--config", str(CONFIGS / f"{name}.cfg"), "--out", str(out)]):
            sys.exit(1)
        print(f"== {name}")
        with open(out / "bounds.csv", newline="") as fh:
            for r in csv.DictReader(fh):
                print(f"  {r['name']:<24} {float(r['value']):>14.6g} ± {float(r['std_error']):<10.3g} {r['status']}")

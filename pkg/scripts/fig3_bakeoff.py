"""UCB1 minus BayesUCB regret on 81 Gaussian bandit instances, Gaussian and Rademacher noise.

    python3 scripts/fig3_bakeoff.py [--runs N] [--out DIR] [--threads T]

Prints the number of instances where BayesUCB is worse by more than 2 SE.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from bayesucb.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=1000)
    ap.add_argument("--out", default="out/bakeoff")
    ap.add_argument("--threads", type=int, default=1)
    a = ap.parse_args()
    for noise in ("gaussian", "rademacher"):
        code = main(["bakeoff", "--noise", noise, "--runs", str(a.runs), "--out", a.out,
                     "--threads", str(a.threads)])
        if code:
            sys.exit(code)
        with open(Path(a.out) / f"bakeoff_{noise}.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        worse = sum(float(r["difference"]) < -2 * float(r["std_error"]) for r in rows)
        print(f"{noise}: {len(rows)} instances, {worse} with BayesUCB worse by > 2 SE")

"""Sweep every family over d and the mixing weight; write one CSV row per run.

    python3 scripts/sweep_families.py --d-max 5 --out sweep.csv
"""

import argparse
import csv
import sys
from collections import Counter

from sepdistill.cli import SWEEP_COLUMNS, sweep_rows
from sepdistill.states import Family


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d-max", type=int, default=4)
    ap.add_argument("--w", type=float, nargs="+", default=[0.1, 0.3, 0.5, 0.7, 0.9])
    ap.add_argument("--families", nargs="+", default=[f.value for f in Family if f is not Family.BELL_MIX])
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    rows = sweep_rows([Family(f) for f in args.families], args.d_max, args.w)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS)
    writer.writeheader()
    writer.writerows(rows)
    if out is not sys.stdout:
        out.close()
    tally = Counter((r["family"], r["verdict"]) for r in rows)
    for (family, verdict), n in sorted(tally.items()):
        print(f"{family:12s} {verdict:14s} {n}", file=sys.stderr)


if __name__ == "__main__":
    main()

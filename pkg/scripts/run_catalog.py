"""Run every suite on every catalog instance and print a status grid.

    python scripts/run_catalog.py [--corpus-size 20] [--json out.json]
"""
import argparse
import json
import time

from superkoszul.brackets import VolumeData
from superkoszul.corpus import CATALOG
from superkoszul.suites import SUITES, Budgets, Context, run_checks

MARK = {"pass": ".", "fail": "F", "skipped": "s"}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--corpus-size", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json")
    args = ap.parse_args()

    budgets = Budgets(corpus_size=args.corpus_size)
    rows = {}
    for inst in CATALOG:
        c, P, lr, F = inst.build()
        ctx = Context(c, P, VolumeData(lr), F, args.seed, budgets)
        t0 = time.time()
        row = {}
        for suite in SUITES:
            row[suite] = "".join(MARK[chk.status] for chk in run_checks(ctx, suite))
        rows[inst.name] = {"suites": row, "seconds": round(time.time() - t0, 2), "pinfty": inst.pinfty}

    width = max(len(n) for n in rows)
    print(" " * width, "  ".join(s[:10].ljust(10) for s in SUITES))
    for name, r in rows.items():
        print(name.ljust(width), "  ".join(r["suites"][s].ljust(10) for s in SUITES), f"{r['seconds']:6.2f}s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Reproduce the headline rate experiment.

Sweeps horizons for one or more adversaries, fits the log-log slope of the
per-T mean metric, and optionally writes the raw records as csv.  With the
defaults this is the same protocol as acceptance criterion 1 (about ten
minutes single-core); pass a smaller --t-grid / --seeds for a quick look.
"""
import argparse
import sys

import numpy as np

from calreg.adversaries import iid_bernoulli, piecewise_drift
from calreg.harness import RunConfig, emit_report, sweep_and_fit_rate


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--t-grid",
        default=",".join(str(2**e) for e in range(10, 18)),
        help="comma-separated horizons (default 2^10..2^17)",
    )
    ap.add_argument("--seeds", type=int, default=10, help="seeds per horizon")
    ap.add_argument("--metric", default="pklcal")
    ap.add_argument(
        "--adversaries",
        default="iid,drift",
        help="subset of {iid,drift}, comma-separated",
    )
    ap.add_argument("--mean", type=float, default=0.5, help="iid label mean")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", help="csv path for the pooled records")
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    t_values = [int(v) for v in args.t_grid.split(",")]
    specs = {
        "iid": iid_bernoulli(args.mean),
        "drift": piecewise_drift(),
    }
    chosen = [name.strip() for name in args.adversaries.split(",") if name.strip()]
    for name in chosen:
        if name not in specs:
            print(f"unknown adversary {name!r}", file=sys.stderr)
            return 1

    pooled = {T: [] for T in t_values}
    records = []
    for name in chosen:
        base = RunConfig(
            T=min(t_values), adversary=specs[name], seed=0, losses=("squared",)
        )
        result = sweep_and_fit_rate(
            base, t_values, args.seeds, metric=args.metric, workers=args.workers
        )
        print(f"{name}: slope={result.slope:.4f} intercept={result.intercept:.4f}")
        for rec in result.records:
            pooled[rec.T].append(rec.report.pklcal)
        records.extend(result.records)

    x = np.log(np.asarray(sorted(pooled), dtype=float))
    y = np.log(np.asarray([np.mean(pooled[T]) for T in sorted(pooled)]))
    slope, intercept = np.polyfit(x, y, 1)
    print(f"pooled: slope={slope:.4f} intercept={intercept:.4f}")
    for T in sorted(pooled):
        print(f"  T={T:>7d} mean={np.mean(pooled[T]):.6g}")
    if args.out:
        emit_report(records, args.out, "csv")
        print(f"records written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

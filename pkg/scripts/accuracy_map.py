#!/usr/bin/env python3
"""Map the series-vs-integral kernel error over (extension ratio, truncation
number), the data behind the boundary-law picture."""

import argparse

from groundbem.experiments import accuracy_map, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ratios", default="1.5,2.0,2.5,3.0,3.5")
    ap.add_argument("--p-values", default="4,6,8,10,12,16,20")
    ap.add_argument("--receivers", type=int, default=64)
    ap.add_argument("--sources", type=int, default=256)
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    report = accuracy_map(
        ratios=[float(v) for v in args.ratios.split(",")],
        p_values=[int(v) for v in args.p_values.split(",")],
        n_receivers=args.receivers,
        n_sources=args.sources,
        seed=args.seed,
        tol=args.tol,
    )
    header = "ratio\\p " + " ".join(f"{int(p):>9d}" for p in report.p_values)
    print(header)
    for i, r in enumerate(report.ratios):
        row = " ".join(f"{v:9.2e}" for v in report.eps2[i])
        print(f"{r:7.3f} {row}")
    for path in write_report(report, args.out):
        print("wrote", path)


if __name__ == "__main__":
    main()

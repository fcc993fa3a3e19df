#!/usr/bin/env python3
"""Measure the wall-clock cost of the factored kernel over the extension
ratio at fixed prescribed accuracy (machine-dependent; trends only)."""

import argparse

import numpy as np

from groundbem.experiments import measure_cost_curve, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ratios", default="1.15,1.35,1.6,2.0,2.5,3.0,3.7")
    ap.add_argument("--eps", type=float, default=1e-4)
    ap.add_argument("--receivers", type=int, default=64)
    ap.add_argument("--sources", type=int, default=256)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    curve = measure_cost_curve(
        ratios=[float(v) for v in args.ratios.split(",")],
        eps=args.eps,
        n_receivers=args.receivers,
        n_sources=args.sources,
        repeats=args.repeats,
        seed=args.seed,
    )
    for r, p, s in zip(curve.ratios, curve.p_values, curve.seconds):
        print(f"ratio {r:5.2f}  p {p:3d}  {s*1e3:8.1f} ms")
    best = int(np.argmin(curve.seconds))
    print(f"minimum at ratio {curve.ratios[best]} (p = {curve.p_values[best]})")
    for path in write_report(curve, args.out):
        print("wrote", path)


if __name__ == "__main__":
    main()

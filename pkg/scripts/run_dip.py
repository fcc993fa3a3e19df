#!/usr/bin/env python3
"""Sweep the extension ratio for the dip benchmark against a self-converged
reference and write the error tables."""

import argparse

from groundbem.experiments import fit_power_law, run_dip_experiment, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=float, default=0.5, help="source height (|h| < 1)")
    ap.add_argument("--ratios", default="1.1,1.124,1.25,1.4,1.6,1.8,2.0")
    ap.add_argument("--edge", type=float, default=0.11)
    ap.add_argument("--eps", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    ratios = [float(v) for v in args.ratios.split(",")]
    report = run_dip_experiment(
        h=args.h, ratios=ratios, target_edge=args.edge, eps=args.eps,
        seed=args.seed,
    )
    for r, ei, et, n in zip(report.ratios, report.eps2_inf,
                            report.eps2_truncated, report.n_panels):
        print(f"ratio {r:5.3f}  N {n:5d}  eps2 kernel {ei:.3e}  truncated {et:.3e}")
    slope, c = fit_power_law(report.ratios, report.eps2_truncated)
    print(f"truncated-BEM error ~ {c:.3e} * ratio^{slope:.2f}")
    for path in write_report(report, args.out):
        print("wrote", path)


if __name__ == "__main__":
    main()

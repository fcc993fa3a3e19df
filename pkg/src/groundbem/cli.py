"""Command-line interface.

Subcommands
-----------
kernel      evaluate the Dirichlet or Neumann ground kernel at one pair
mesh        generate benchmark meshes (bump, dip, sphere, disc)
solve       assemble + solve a mesh under a monopole source, export results
experiment  run a named validation study (bump, dip, accuracy-map, cost-curve)

Exit codes: 0 success, 1 usage error, 2 numeric/domain failure.
Identical invocations with identical seeds write byte-identical CSV
output (wall-clock columns of the cost-curve study excepted).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import experiments as xp
from .bem import (
    BemConfig,
    assemble,
    evaluate_field,
    export_field_csv,
    export_field_json,
    set_point_source_rhs,
    solve as bem_solve,
)
from .errors import GroundBemError
from .ground_kernel import KernelConfig, kernel_neumann, kernel_value
from .surface_mesh import (
    EXTENSION,
    DomainSpec,
    load_mesh,
    make_bump_dip_mesh,
    make_flat_disc_mesh,
    make_sphere_mesh,
    save_mesh,
)

USAGE_ERROR = 1
NUMERIC_ERROR = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; we reserve 2 for numeric
    # failures, so route usage problems through our own exception.
    def error(self, message):
        raise _UsageError(message)


def _parse_point(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise _UsageError(f"expected three comma-separated coordinates, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise _UsageError(f"bad coordinate in {text!r}: {exc}") from exc


def _default_outdir():
    return os.environ.get("GROUNDBEM_OUTDIR", ".")


def _limit_threads(n):
    if n is None:
        return None
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=int(n))
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)
        return None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="groundbem", description=__doc__,
                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--threads", type=int, default=None,
                    help="cap BLAS/internal parallelism (best effort)")
    sub = ap.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="evaluate the ground kernel at one pair")
    k.add_argument("--y", required=True, help="evaluation point as x,y,z")
    k.add_argument("--x", required=True, help="source point as x,y,z")
    k.add_argument("--r", type=float, default=1.0, help="hole radius R")
    k.add_argument("--p", type=int, default=12, help="series truncation")
    k.add_argument("--tol", type=float, default=1e-10, help="quadrature tolerance")
    k.add_argument("--path", choices=("auto", "series", "integral"), default="auto")
    k.add_argument("--neumann", action="store_true",
                   help="evaluate the Neumann kernel instead of the Dirichlet one")
    k.add_argument("--out", default=None, help="also write the value to this file")

    m = sub.add_parser("mesh", help="generate a benchmark mesh")
    m.add_argument("--kind", choices=("bump", "dip", "sphere", "disc"), required=True)
    m.add_argument("--r0", type=float, default=None,
                   help="detail radius (bump default 2, dip fixed at 1)")
    m.add_argument("--re", type=float, default=None, help="extended radius")
    m.add_argument("--edge", type=float, default=0.1, help="target edge length")
    m.add_argument("--radius", type=float, default=1.0, help="sphere/disc radius")
    m.add_argument("--out", required=True, help="output mesh file")

    s = sub.add_parser("solve", help="solve a mesh under a monopole source")
    s.add_argument("--mesh", required=True, help="mesh file (see mesh subcommand)")
    s.add_argument("--source", required=True, help="monopole location as x,y,z")
    s.add_argument("--eps", type=float, default=1e-4,
                   help="prescribed kernel accuracy (sets the truncation)")
    s.add_argument("--p", type=int, default=None, help="override truncation number")
    s.add_argument("--r0", type=float, default=None, help="override detail radius")
    s.add_argument("--re", type=float, default=None, help="override extended radius")
    s.add_argument("--solver", choices=("direct", "iterative"), default="direct")
    s.add_argument("--no-kernel", action="store_true",
                   help="plain truncated BEM: drop the ground-kernel term")
    s.add_argument("--field", default=None,
                   help="also evaluate the field on an nr,nth interior grid")
    s.add_argument("--out-prefix", default=None,
                   help="output prefix (default: mesh name in the output dir)")

    e = sub.add_parser("experiment", help="run a named validation study")
    e.add_argument("name", choices=("bump", "dip", "accuracy-map", "cost-curve"))
    e.add_argument("--h", type=float, default=None, help="source height")
    e.add_argument("--eps", type=float, default=1e-4, help="prescribed accuracy")
    e.add_argument("--edge", type=float, default=None, help="target edge length")
    e.add_argument("--delta", type=float, default=0.0935,
                   help="extension size for the bump study")
    e.add_argument("--ratios", default=None,
                   help="comma-separated extension ratios (dip sweep / maps)")
    e.add_argument("--p-values", default=None,
                   help="comma-separated truncation numbers (accuracy map)")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", default=None, help="output directory")
    return ap


def _cmd_kernel(args) -> int:
    cfg = KernelConfig(scale_radius=args.r, p=args.p, integral_tolerance=args.tol)
    fn = kernel_neumann if args.neumann else kernel_value
    val = fn(_parse_point(args.y), _parse_point(args.x), cfg, path=args.path)
    print(repr(float(val)))
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(repr(float(val)) + "\n")
    return 0


def _cmd_mesh(args) -> int:
    if args.kind == "bump":
        r0 = 2.0 if args.r0 is None else args.r0
        re = r0 * 1.0935 if args.re is None else args.re
        mesh = make_bump_dip_mesh(1, r0=r0, re=re, target_edge=args.edge)
    elif args.kind == "dip":
        r0 = 1.0 if args.r0 is None else args.r0
        re = 1.124 if args.re is None else args.re
        mesh = make_bump_dip_mesh(-1, r0=r0, re=re, target_edge=args.edge)
    elif args.kind == "sphere":
        mesh = make_sphere_mesh(args.edge, radius=args.radius)
    else:
        mesh = make_flat_disc_mesh(args.radius, args.edge)
    save_mesh(mesh, args.out)
    print(f"wrote {args.out}: {len(mesh)} panels, tags {mesh.tag_counts()}")
    return 0


def _infer_domain(mesh, r0, re):
    rho = np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1])
    has_ext = bool(np.any(mesh.tags == EXTENSION))
    if r0 is None:
        inner = mesh.faces[mesh.tags != EXTENSION]
        if inner.size:
            r0 = float(np.linalg.norm(mesh.vertices[np.unique(inner)], axis=1).max())
        else:
            r0 = float(rho.max())
    if re is None:
        if has_ext:
            ext_v = np.unique(mesh.faces[mesh.tags == EXTENSION])
            re = float(rho[ext_v].max())
        else:
            re = r0
    return DomainSpec(r0=r0, re=re), has_ext


def _cmd_solve(args) -> int:
    mesh = load_mesh(args.mesh)
    domain, has_ext = _infer_domain(mesh, args.r0, args.re)
    use_kernel = has_ext and not args.no_kernel and domain.re > domain.r0
    if args.p is not None:
        p = args.p
    elif use_kernel:
        p = xp.choose_truncation(domain.r0, domain.re, args.eps)
    else:
        p = 2
    if not use_kernel and not args.no_kernel:
        print("note: mesh has no extension ring; solving without the ground kernel",
              file=sys.stderr)
    cfg = BemConfig(p=p, solver=args.solver, prescribed_eps=args.eps,
                    use_ground_kernel=use_kernel)
    system = assemble(mesh, domain, cfg)
    source = _parse_point(args.source)
    set_point_source_rhs(system, source)
    sigma = bem_solve(system)

    prefix = args.out_prefix
    if prefix is None:
        stem = os.path.splitext(os.path.basename(args.mesh))[0]
        prefix = os.path.join(_default_outdir(), stem)
    os.makedirs(os.path.dirname(prefix) or ".", exist_ok=True)

    sigma_path = prefix + "_sigma.csv"
    with open(sigma_path, "w", encoding="ascii") as fh:
        fh.write("x,y,z,area,tag,sigma\n")
        for c, w, t, sg in zip(mesh.centroids, mesh.areas, mesh.tags, sigma):
            fh.write(
                f"{float(c[0])!r},{float(c[1])!r},{float(c[2])!r},"
                f"{float(w)!r},{int(t)},{float(sg)!r}\n"
            )
    meta = {
        "mesh": args.mesh,
        "panels": len(mesh),
        "r0": domain.r0,
        "re": domain.re,
        "p": p,
        "eps": args.eps,
        "solver": args.solver,
        "use_ground_kernel": use_kernel,
        "source": list(source),
    }
    with open(prefix + "_solution.json", "w", encoding="ascii") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    written = [sigma_path, prefix + "_solution.json"]

    if args.field:
        try:
            nr, nth = (int(v) for v in args.field.split(","))
        except ValueError as exc:
            raise _UsageError(f"--field expects nr,nth, got {args.field!r}") from exc
        stand = 2.0 * mesh.mean_diameter
        pts = xp._half_disc_grid(
            1.0 if np.any(mesh.tags == 0) else stand, domain.r0, stand, nr, nth
        )
        grid = evaluate_field(system, pts, source=source)
        export_field_csv(grid, prefix + "_field.csv")
        export_field_json(grid, prefix + "_field.json")
        written += [prefix + "_field.csv", prefix + "_field.json"]
    for w in written:
        print(f"wrote {w}")
    return 0


def _cmd_experiment(args) -> int:
    outdir = args.out or _default_outdir()
    ratios = None
    if args.ratios:
        ratios = [float(v) for v in args.ratios.split(",")]
    if args.name == "bump":
        rep = xp.run_bump_experiment(
            h=2.0 if args.h is None else args.h,
            delta=args.delta,
            target_edge=args.edge or 0.09,
            eps=args.eps,
            seed=args.seed,
        )
        print(json.dumps(rep.summary(), indent=1, sort_keys=True))
    elif args.name == "dip":
        rep = xp.run_dip_experiment(
            h=0.5 if args.h is None else args.h,
            ratios=ratios or (1.1, 1.124, 1.25, 1.4, 1.6, 1.8, 2.0),
            target_edge=args.edge or 0.11,
            eps=args.eps,
            seed=args.seed,
        )
        print(json.dumps(rep.summary(), indent=1, sort_keys=True))
    elif args.name == "accuracy-map":
        pv = [int(v) for v in args.p_values.split(",")] if args.p_values else [4, 8, 12, 16]
        rep = xp.accuracy_map(
            ratios or [1.5, 2.0, 2.5, 3.0],
            pv,
            seed=args.seed,
        )
        print(f"accuracy map over {rep.ratios.size} ratios x {rep.p_values.size} truncations")
    else:
        rep = xp.measure_cost_curve(
            ratios=ratios or (1.15, 1.35, 1.6, 2.0, 2.5, 3.0, 3.7),
            eps=args.eps,
            seed=args.seed,
        )
        best = int(np.argmin(rep.seconds))
        print(f"measured minimum at ratio {rep.ratios[best]} (p = {rep.p_values[best]})")
    for path in xp.write_report(rep, outdir):
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except _UsageError as exc:
            print(f"usage error: {exc}", file=sys.stderr)
            return USAGE_ERROR
        limiter = _limit_threads(args.threads)
        try:
            if args.command == "kernel":
                return _cmd_kernel(args)
            if args.command == "mesh":
                return _cmd_mesh(args)
            if args.command == "solve":
                return _cmd_solve(args)
            return _cmd_experiment(args)
        finally:
            if limiter is not None:
                limiter.unregister()
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except GroundBemError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return NUMERIC_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Collocation boundary-element solver.

The boundary integral equation is discretized with constant panels and
collocation at panel centroids.  The system operator has two parts:

* a dense free-space block: analytic single-layer integrals for panels
  within the near-field radius of a collocation point (always for the
  self term), centroid monopole approximation beyond it;
* the ground-plane kernel term, kept in factored low-rank form -- an
  (N x q) receiver-harmonic factor times a (q x N) source-signature
  factor -- so applying it to a vector costs O(q N), never O(N^2).

Rows collocated on the extension ring (z = 0) receive no kernel
contribution: the receiver harmonics of odd n + m vanish identically on
the plane and those are the only active columns of the factor.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy.sparse.linalg import LinearOperator, lgmres

from .errors import DomainError, SolveError
from .ground_kernel import (
    KernelConfig,
    interior_inner_cap,
    kernel_series,
    source_signature,
    source_signature_batch,
)
from .harmonics import build_spectral_constants, sh_index, solid_harmonics_batch
from .surface_mesh import EXTENSION, SURFACE, DomainSpec, Panel, PanelMesh

__all__ = [
    "BemConfig",
    "BemSystem",
    "FieldGrid",
    "triangle_single_layer",
    "assemble",
    "set_point_source_rhs",
    "set_boundary_potential",
    "solve",
    "apply_ground_kernel",
    "ground_kernel_matrix",
    "evaluate_field",
    "export_field_csv",
    "export_field_json",
]

_FOUR_PI = 4.0 * math.pi


# ---------------------------------------------------------------------------
# Analytic single-layer integral over a triangle
# ---------------------------------------------------------------------------


def _edge_h(x, y, z):
    """Per-edge antiderivative of the triangle single-layer reduction.

    ``y`` is the (non-negative) height of the evaluation point over the
    panel plane, ``z`` the signed in-plane distance to the edge line, and
    ``x`` the along-edge coordinate.  The removable singularities are
    handled explicitly: the log term carries a z factor (limit 0 on the
    edge plane) and is evaluated in a cancellation-free form for x < 0.
    """
    r = np.sqrt(x * x + y * y + z * z)
    at = y * (np.arctan2(x, z) - np.arctan2(y * x, z * r))
    arg = np.where(x < 0.0, (y * y + z * z) / np.maximum(r - x, 1e-300), r + x)
    lg = np.where(z != 0.0, -z * np.log(np.maximum(arg, 1e-300)), 0.0)
    return at + lg


def _single_layer_bare(fv, normals, tangents, lengths, enormals, points):
    """Integral of 1/|y - x| over triangles, analytic three-edge sum.

    All panel arrays and ``points`` must have broadcast-compatible leading
    shapes; panel arrays carry trailing dims (3, 3) / (3,) / (3, 3), points
    carry (3,).  Finite for evaluation points on the panel.
    """
    h = np.abs(np.sum((points - fv[..., 0, :]) * normals, axis=-1))
    total = 0.0
    for q in range(3):
        d = points - fv[..., q, :]
        xq = np.sum(d * tangents[..., q, :], axis=-1)
        zq = np.sum(d * enormals[..., q, :], axis=-1)
        lq = lengths[..., q]
        total = total + _edge_h(lq - xq, h, zq) - _edge_h(-xq, h, zq)
    return total


def triangle_single_layer(panel: Panel, y) -> float:
    """Single-layer potential of a unit density over one panel,
    ``int_panel G(y, x) dS``, exact for any evaluation point."""
    pt = np.asarray(y, dtype=float).reshape(3)
    bare = _single_layer_bare(
        panel.vertices[None, :, :],
        panel.normal[None, :],
        panel.edge_tangents[None, :, :],
        panel.edge_lengths[None, :],
        panel.edge_normals[None, :, :],
        pt[None, :],
    )[0]
    return float(bare) / _FOUR_PI


def _panel_layer_at_points(mesh: PanelMesh, j: int, points: np.ndarray) -> np.ndarray:
    bare = _single_layer_bare(
        mesh.face_vertices[j][None, :, :],
        mesh.normals[j][None, :],
        mesh.edge_tangents[j][None, :, :],
        mesh.edge_lengths[j][None, :],
        mesh.edge_normals[j][None, :, :],
        points,
    )
    return bare / _FOUR_PI


# ---------------------------------------------------------------------------
# System assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BemConfig:
    """Discretization and solver parameters.

    ``nearfield_radius = None`` defaults to 5 mean panel diameters; the
    self integral is always analytic regardless.  ``prescribed_eps`` is
    the target kernel accuracy used for sanity warnings against the
    chosen truncation number.
    """

    p: int = 12
    nearfield_radius: float | None = None
    solver: str = "direct"
    iterative_tol: float = 1e-10
    prescribed_eps: float = 1e-4
    use_ground_kernel: bool = True

    def __post_init__(self):
        if self.p < 2:
            raise DomainError(f"truncation number must be >= 2, got {self.p}")
        if self.nearfield_radius is not None and self.nearfield_radius <= 0:
            raise DomainError("nearfield_radius must be positive")
        if self.solver not in ("direct", "iterative"):
            raise DomainError(f"unknown solver {self.solver!r}")
        if not 0.0 < self.prescribed_eps < 1.0:
            raise DomainError("prescribed_eps must lie in (0, 1)")


@dataclass
class BemSystem:
    """Assembled collocation system.

    ``free_matrix`` is the dense free-space block; the ground-kernel term
    is stored only as the factor pair ``(rfac, sfac)`` with
    ``kernel term = rfac @ sfac`` (source factor already includes panel
    areas).  ``rhs`` and ``solution`` are per-panel vectors.
    """

    mesh: PanelMesh
    domain: DomainSpec
    config: BemConfig
    free_matrix: np.ndarray
    rfac: np.ndarray
    sfac: np.ndarray
    active_idx: np.ndarray
    constants: object
    kernel_config: KernelConfig
    rhs: np.ndarray
    solution: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.mesh)


def _active_indices(p: int) -> np.ndarray:
    """Flat harmonic indices with n + m odd: the only coefficients the
    ground kernel couples (all others vanish by plane parity)."""
    idx = [sh_index(n, m) for n in range(p) for m in range(-n, n + 1) if (n + m) % 2]
    return np.asarray(idx, dtype=np.int64)


def _receiver_factor(points: np.ndarray, re: float, p: int, active: np.ndarray) -> np.ndarray:
    """Receiver-side factor: scaled solid harmonics at points / re,
    restricted to the active parity columns."""
    return solid_harmonics_batch(points / re, p)[:, active] / re


def assemble(mesh: PanelMesh, domain: DomainSpec, config: BemConfig) -> BemSystem:
    """Assemble the collocation system for the given mesh and domain.

    The free-space block uses the analytic triangle integral for pairs
    closer than the near-field radius and the centroid monopole otherwise.
    Kernel source factors are built from the plane recurrences for panels
    on the extension (and any flat ground), from the interior harmonic
    series elsewhere.
    """
    n = len(mesh)
    re = domain.re
    p = config.p
    implied_eps = (domain.r0 / domain.re) ** p if domain.re > domain.r0 else 1.0
    if config.use_ground_kernel and implied_eps > config.prescribed_eps:
        warnings.warn(
            f"truncation p = {p} gives kernel accuracy ~{implied_eps:.2e}, "
            f"worse than the prescribed {config.prescribed_eps:.2e}",
            stacklevel=2,
        )

    r_nf = config.nearfield_radius
    if r_nf is None:
        r_nf = 5.0 * mesh.mean_diameter

    centroids = mesh.centroids
    areas = mesh.areas

    # Far block: centroid monopole approximation, chunked over rows.
    a = np.empty((n, n))
    sq = np.einsum("ij,ij->i", centroids, centroids)
    chunk = max(1, int(2e7) // max(n, 1))
    with np.errstate(divide="ignore"):
        for i0 in range(0, n, chunk):
            i1 = min(i0 + chunk, n)
            d2 = sq[i0:i1, None] + sq[None, :] - 2.0 * centroids[i0:i1] @ centroids.T
            np.maximum(d2, 0.0, out=d2)
            a[i0:i1] = areas[None, :] / (_FOUR_PI * np.sqrt(d2))

    # Near corrections: analytic integral for every pair within r_nf.
    r_nf2 = r_nf * r_nf
    for j in range(n):
        d2 = np.einsum("ij,ij->i", centroids - centroids[j], centroids - centroids[j])
        near = np.nonzero(d2 < r_nf2)[0]
        if near.size:
            a[near, j] = _panel_layer_at_points(mesh, j, centroids[near])

    constants = build_spectral_constants(p)
    kcfg = KernelConfig(scale_radius=re, p=p)
    active = _active_indices(p)
    if config.use_ground_kernel:
        cap = interior_inner_cap(constants, p)
        if cap < 2 * p - 3:
            tail = (domain.r0 / domain.re) ** cap
            if tail > 0.1 * config.prescribed_eps:
                warnings.warn(
                    f"inner series capped at degree {cap} by float64 range; "
                    f"implied tail ~{tail:.2e} vs prescribed {config.prescribed_eps:.2e}",
                    stacklevel=2,
                )
        rfac = _receiver_factor(centroids, re, p, active)
        sfac = (
            source_signature_batch(centroids / re, constants)[:, active]
            * areas[:, None]
        ).T
    else:
        rfac = np.zeros((n, 0))
        sfac = np.zeros((0, n))

    return BemSystem(
        mesh=mesh,
        domain=domain,
        config=config,
        free_matrix=a,
        rfac=rfac,
        sfac=sfac,
        active_idx=active,
        constants=constants,
        kernel_config=kcfg,
        rhs=np.zeros(n),
    )


def set_point_source_rhs(system: BemSystem, source) -> None:
    """Right-hand side of the grounded benchmark: the boundary must cancel
    the incident potential of a unit monopole, free-space plus kernel part
    (the kernel part vanishes on extension rows by plane parity)."""
    xs = np.asarray(source, dtype=float).reshape(3)
    g = np.einsum(
        "ij,ij->i", system.mesh.centroids - xs, system.mesh.centroids - xs
    )
    rhs = -1.0 / (_FOUR_PI * np.sqrt(g))
    if system.config.use_ground_kernel:
        sig = source_signature(xs / system.domain.re, system.constants)
        rhs = rhs - system.rfac @ sig.coeffs[system.active_idx]
    system.rhs = rhs
    system.solution = None


def set_boundary_potential(system: BemSystem, potential) -> None:
    """Dirichlet data: ``potential`` (callable of points or array) sampled
    at SURFACE panel centroids, zero on the grounded rows."""
    mesh = system.mesh
    rhs = np.zeros(len(mesh))
    on_s = mesh.tags == SURFACE
    if callable(potential):
        rhs[on_s] = np.asarray(
            [potential(c) for c in mesh.centroids[on_s]], dtype=float
        )
    else:
        vals = np.asarray(potential, dtype=float)
        if vals.shape == (len(mesh),):
            rhs = vals.copy()
        elif vals.shape == (int(np.sum(on_s)),):
            rhs[on_s] = vals
        else:
            raise DomainError("potential array has wrong length")
    system.rhs = rhs
    system.solution = None


def apply_ground_kernel(system: BemSystem, vec: np.ndarray) -> np.ndarray:
    """Factored kernel term applied to a density vector, O(q N)."""
    if system.sfac.shape[0] == 0:
        return np.zeros(system.size)
    return system.rfac @ (system.sfac @ vec)


def apply_operator(system: BemSystem, vec: np.ndarray) -> np.ndarray:
    """Full system operator (free-space block plus factored kernel)."""
    return system.free_matrix @ vec + apply_ground_kernel(system, vec)


def ground_kernel_matrix(system: BemSystem) -> np.ndarray:
    """Densified kernel matrix w_j K(y_i, x_j; re), built pairwise through
    the single-point series path.  O(N^2) work and storage; diagnostics
    and small-system tests only."""
    mesh = system.mesh
    n = len(mesh)
    re = system.domain.re
    out = np.zeros((n, n))
    for j in range(n):
        sig = source_signature(mesh.centroids[j] / re, system.constants)
        for i in range(n):
            out[i, j] = mesh.areas[j] * kernel_series(
                mesh.centroids[i], sig, system.kernel_config
            )
    return out


def solve(system: BemSystem, rtol_check: float = 1e-10) -> np.ndarray:
    """Solve for the panel charge density.

    ``direct`` forms free + rfac sfac transiently (chunked, the stored
    factors stay untouched) and LU-solves; ``iterative`` runs lgmres on
    the factored operator.  The relative residual is verified against
    ``rtol_check`` either way.
    """
    n = system.size
    rhs = system.rhs
    if not np.any(rhs):
        warnings.warn("solving with an all-zero right-hand side", stacklevel=2)

    if system.config.solver == "direct":
        a = system.free_matrix.copy()
        if system.sfac.shape[0]:
            chunk = max(1, int(2e7) // max(n, 1))
            for i0 in range(0, n, chunk):
                i1 = min(i0 + chunk, n)
                a[i0:i1] += system.rfac[i0:i1] @ system.sfac
        try:
            sigma = sla.solve(a, rhs, overwrite_a=True, assume_a="gen")
        except sla.LinAlgError as exc:
            cond = float(np.linalg.cond(system.free_matrix)) if n <= 2000 else None
            raise SolveError(f"direct solve failed: {exc}", condition=cond) from exc
        del a
    else:
        op = LinearOperator((n, n), matvec=lambda v: apply_operator(system, v))
        sigma, info = lgmres(
            op, rhs, rtol=system.config.iterative_tol, atol=0.0, maxiter=2000
        )
        if info != 0:
            raise SolveError(f"lgmres did not converge (info = {info})")

    rhs_norm = float(np.linalg.norm(rhs))
    resid = np.linalg.norm(apply_operator(system, sigma) - rhs) / (rhs_norm or 1.0)
    if not resid <= rtol_check:
        cond = float(np.linalg.cond(system.free_matrix)) if n <= 2000 else None
        raise SolveError(
            f"solution residual {resid:.3e} exceeds {rtol_check:.1e}",
            condition=cond,
        )
    system.solution = sigma
    return sigma


# ---------------------------------------------------------------------------
# Field evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldGrid:
    """Potential values on a set of evaluation points.

    ``induced`` is the field minus the incident monopole (equal to
    ``values`` when no source is present); ``flags`` marks points lying
    below the ground level, for which the value is still returned.
    """

    points: np.ndarray
    values: np.ndarray
    induced: np.ndarray
    flags: np.ndarray
    metadata: dict = field(default_factory=dict)


def _below_ground_flags(mesh: PanelMesh, points: np.ndarray) -> np.ndarray:
    flags = points[:, 2] < -1e-12
    on_surface = mesh.tags == SURFACE
    if np.any(on_surface):
        bump = mesh.centroids[on_surface][:, 2].mean() > 0.0
        rho2 = points[:, 0] ** 2 + points[:, 1] ** 2
        if bump:
            flags = flags | (rho2 + points[:, 2] ** 2 < 1.0)
        else:
            inside = rho2 < 1.0
            zsurf = -np.sqrt(np.maximum(0.0, 1.0 - rho2))
            flags = np.where(inside, points[:, 2] < zsurf, flags)
    return flags


def evaluate_field(system: BemSystem, points, source=None) -> FieldGrid:
    """Potential of the solved system at the given points.

    The panel sum uses the same near/far dispatch as assembly; the kernel
    part reuses the stored source factors.  With ``source`` given, the
    incident monopole and its kernel image are added and the induced part
    is reported separately.
    """
    if system.solution is None:
        raise SolveError("system has no solution; call solve() first")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    sigma = system.solution
    mesh = system.mesh
    npts = pts.shape[0]

    r_nf = system.config.nearfield_radius
    if r_nf is None:
        r_nf = 5.0 * mesh.mean_diameter

    d2 = (
        np.einsum("ij,ij->i", pts, pts)[:, None]
        + np.einsum("ij,ij->i", mesh.centroids, mesh.centroids)[None, :]
        - 2.0 * pts @ mesh.centroids.T
    )
    np.maximum(d2, 0.0, out=d2)
    with np.errstate(divide="ignore"):
        g = mesh.areas[None, :] / (_FOUR_PI * np.sqrt(d2))
    near_any = d2 < r_nf * r_nf
    for j in np.nonzero(near_any.any(axis=0))[0]:
        rows = np.nonzero(near_any[:, j])[0]
        g[rows, j] = _panel_layer_at_points(mesh, j, pts[rows])
    values = g @ sigma

    if system.config.use_ground_kernel:
        rfac_pts = _receiver_factor(pts, system.domain.re, system.config.p, system.active_idx)
        values = values + rfac_pts @ (system.sfac @ sigma)

    induced = values.copy()
    if source is not None:
        xs = np.asarray(source, dtype=float).reshape(3)
        dist = np.linalg.norm(pts - xs, axis=1)
        values = values + 1.0 / (_FOUR_PI * dist)
        if system.config.use_ground_kernel:
            sig = source_signature(xs / system.domain.re, system.constants)
            ksrc = rfac_pts @ sig.coeffs[system.active_idx]
            values = values + ksrc
            induced = induced + ksrc

    return FieldGrid(
        points=pts,
        values=values,
        induced=induced,
        flags=_below_ground_flags(mesh, pts),
        metadata={
            "p": system.config.p,
            "re": system.domain.re,
            "r0": system.domain.r0,
            "use_ground_kernel": system.config.use_ground_kernel,
            "source": None if source is None else list(map(float, np.ravel(source))),
        },
    )


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def export_field_csv(grid: FieldGrid, path) -> None:
    """Write ``x,y,z,value,induced,below_ground`` rows (repr floats, so the
    output is byte-stable for identical inputs)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("x,y,z,value,induced,below_ground\n")
        for p, v, ind, fl in zip(grid.points, grid.values, grid.induced, grid.flags):
            fh.write(
                f"{float(p[0])!r},{float(p[1])!r},{float(p[2])!r},"
                f"{float(v)!r},{float(ind)!r},{int(fl)}\n"
            )


def export_field_json(grid: FieldGrid, path) -> None:
    payload = {
        "metadata": grid.metadata,
        "points": grid.points.tolist(),
        "values": grid.values.tolist(),
        "induced": grid.induced.tolist(),
        "below_ground": grid.flags.astype(int).tolist(),
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")

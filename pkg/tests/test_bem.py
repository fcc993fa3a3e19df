import math
import time

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from groundbem.bem import (
    BemConfig,
    apply_ground_kernel,
    apply_operator,
    assemble,
    evaluate_field,
    export_field_csv,
    export_field_json,
    ground_kernel_matrix,
    set_boundary_potential,
    set_point_source_rhs,
    solve,
    triangle_single_layer,
)
from groundbem.errors import DomainError, SolveError
from groundbem.ground_kernel import KernelConfig, kernel_integral
from groundbem.surface_mesh import (
    EXTENSION,
    GROUND,
    SURFACE,
    DomainSpec,
    PanelMesh,
    make_bump_dip_mesh,
    make_flat_disc_mesh,
)

from conftest import green, oracle_triangle_self


def make_panel(vertices, tag=GROUND):
    verts = np.asarray(vertices, dtype=float)
    mesh = PanelMesh(verts, np.array([[0, 1, 2]]), np.array([tag]))
    return mesh.panel(0)


# ---------------------------------------------------------------------------
# Analytic triangle integral
# ---------------------------------------------------------------------------


def test_far_field_matches_monopole():
    panel = make_panel([[0, 0, 0], [0.1, 0, 0], [0, 0.1, 0]])
    y = panel.centroid + np.array([3.0, -5.0, 8.0])
    want = panel.area * green(y, panel.centroid)
    assert triangle_single_layer(panel, y) == pytest.approx(want, rel=1e-4)


def test_self_term_matches_polar_oracle():
    v2 = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
    panel = make_panel([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    c2 = np.mean(v2, axis=0)
    want = oracle_triangle_self(v2, c2)
    assert triangle_single_layer(panel, panel.centroid) == pytest.approx(want, rel=1e-8)
    # off-center in-plane point as well
    pt = np.array([0.3, 0.2])
    assert triangle_single_layer(panel, (0.3, 0.2, 0.0)) == pytest.approx(
        oracle_triangle_self(v2, pt), rel=1e-8
    )


def test_rigid_motion_invariance(rng):
    verts = rng.uniform(-1, 1, (3, 3))
    while np.linalg.norm(np.cross(verts[1] - verts[0], verts[2] - verts[0])) < 0.3:
        verts = rng.uniform(-1, 1, (3, 3))
    y = rng.uniform(-2, 2, 3)
    rot = Rotation.from_rotvec([0.4, -0.9, 0.6]).as_matrix()
    shift = np.array([3.0, -2.0, 1.5])
    a = triangle_single_layer(make_panel(verts), y)
    b = triangle_single_layer(make_panel(verts @ rot.T + shift), rot @ y + shift)
    assert b == pytest.approx(a, rel=1e-13)


def test_vertex_and_edge_points_finite():
    panel = make_panel([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    for pt in [(0, 0, 0), (0.5, 0, 0), (2.5, 0, 0), (-1.0, 0.0, 0.0)]:
        val = triangle_single_layer(panel, pt)
        assert math.isfinite(val)
        assert val >= 0.0


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_system():
    mesh = make_bump_dip_mesh(1, r0=2.0, re=3.0, target_edge=0.5)
    domain = DomainSpec(r0=2.0, re=3.0)
    with pytest.warns(UserWarning):
        system = assemble(mesh, domain, BemConfig(p=12))
    return system


def test_small_mesh_size(small_system):
    # the factored-vs-dense comparisons below run on an O(200)-panel mesh
    assert 150 <= small_system.size <= 400


def test_far_pair_green_symmetry(small_system):
    mesh = small_system.mesh
    a = small_system.free_matrix
    r_nf = 5.0 * mesh.mean_diameter
    n = len(mesh)
    idx = np.arange(0, n, 7)
    for i in idx:
        for j in idx:
            if i == j:
                continue
            d = np.linalg.norm(mesh.centroids[i] - mesh.centroids[j])
            if d > r_nf:
                gij = a[i, j] / mesh.areas[j]
                gji = a[j, i] / mesh.areas[i]
                assert gij == pytest.approx(gji, rel=1e-13)


def test_near_entries_are_analytic(small_system):
    mesh = small_system.mesh
    r_nf = 5.0 * mesh.mean_diameter
    a = small_system.free_matrix
    hits = 0
    for j in range(0, len(mesh), 11):
        panel = mesh.panel(j)
        for i in range(0, len(mesh), 13):
            d = np.linalg.norm(mesh.centroids[i] - mesh.centroids[j])
            want = (
                triangle_single_layer(panel, mesh.centroids[i])
                if d < r_nf
                else mesh.areas[j] * green(mesh.centroids[i], mesh.centroids[j])
            )
            assert a[i, j] == pytest.approx(want, rel=1e-12)
            hits += 1
    assert hits > 100


@pytest.fixture(scope="module")
def densified(small_system):
    return ground_kernel_matrix(small_system)


def test_factored_equals_densified(small_system, densified, rng):
    bound = 3.0 * (2.0 / 3.0) ** 12
    for _ in range(10):
        v = rng.standard_normal(small_system.size)
        via_factors = apply_ground_kernel(small_system, v)
        via_dense = densified @ v
        rel = np.linalg.norm(via_factors - via_dense) / np.linalg.norm(via_dense)
        assert rel <= bound
        assert rel <= 1e-12  # same truncation on both sides: rounding only


def test_densified_entries_match_integral(small_system, densified, rng):
    # spot-check the series-built matrix against the quadrature path at
    # the truncation-error tolerance; only rows off the plane carry a
    # nonzero kernel (plane rows are checked for exact zeros instead)
    mesh = small_system.mesh
    cfg = KernelConfig(scale_radius=3.0, p=12, integral_tolerance=1e-10)
    rows = np.nonzero(mesh.tags == SURFACE)[0]
    plane_rows = np.nonzero(mesh.tags != SURFACE)[0]
    assert np.abs(densified[plane_rows]).max() == 0.0
    bound = 3.0 * (2.0 / 3.0) ** 12
    checked = 0
    for _ in range(30):
        i = int(rng.choice(rows))
        j = int(rng.integers(0, len(mesh)))
        ref = mesh.areas[j] * kernel_integral(
            mesh.centroids[i], mesh.centroids[j], cfg
        )
        if abs(ref) < 1e-12:
            continue
        assert densified[i, j] == pytest.approx(ref, rel=bound)
        checked += 1
    assert checked > 15


def test_extension_rows_have_no_kernel(small_system, rng):
    ext = small_system.mesh.tags == EXTENSION
    assert np.any(ext)
    v = rng.standard_normal(small_system.size)
    contrib = apply_ground_kernel(small_system, v)
    assert np.abs(contrib[ext]).max() == 0.0
    assert np.abs(contrib[~ext]).max() > 0.0


def test_truncation_error_halves_twice_per_two_orders(rng):
    # at ratio 2, raising p by 2 cuts the series-vs-integral discrepancy
    # by about (1/2)^2
    from groundbem.ground_kernel import kernel_series, source_signature
    from groundbem.harmonics import build_spectral_constants

    y = np.array([0.9, 0.2, 0.35])
    x = np.array([0.3, -0.8, 0.45])
    cfg = KernelConfig(scale_radius=2.0, p=8, integral_tolerance=1e-12)
    ref = kernel_integral(y, x, cfg)
    errs = []
    for p in (8, 10, 12):
        constants = build_spectral_constants(p)
        val = kernel_series(
            y, source_signature(x / 2.0, constants), KernelConfig(scale_radius=2.0, p=p)
        )
        errs.append(abs(val - ref))
    for e1, e2 in zip(errs, errs[1:]):
        assert 2.0 <= e1 / e2 <= 8.0  # nominal 4, within a factor 2


# ---------------------------------------------------------------------------
# Solve
# ---------------------------------------------------------------------------


def test_solve_residual_contract(small_system):
    set_point_source_rhs(small_system, (0.0, 0.0, 1.5))
    sigma = solve(small_system)
    resid = np.linalg.norm(
        apply_operator(small_system, sigma) - small_system.rhs
    ) / np.linalg.norm(small_system.rhs)
    assert resid <= 1e-10


def test_iterative_matches_direct(small_system):
    set_point_source_rhs(small_system, (0.0, 0.0, 1.5))
    direct = solve(small_system)
    it_cfg = BemConfig(p=12, solver="iterative")
    with pytest.warns(UserWarning):
        it_sys = assemble(small_system.mesh, small_system.domain, it_cfg)
    set_point_source_rhs(it_sys, (0.0, 0.0, 1.5))
    iterative = solve(it_sys)
    assert np.linalg.norm(iterative - direct) / np.linalg.norm(direct) < 1e-7


def test_flat_disc_matches_image_charge_density():
    mesh = make_flat_disc_mesh(3.0, 0.15)
    system = assemble(mesh, DomainSpec(r0=3.0, re=3.0), BemConfig(p=2, use_ground_kernel=False))
    h = 0.5
    set_point_source_rhs(system, (0.0, 0.0, h))
    sigma = solve(system)
    rho = np.hypot(mesh.centroids[:, 0], mesh.centroids[:, 1])
    inner = rho < 1.5
    exact = -h / (2.0 * math.pi * (rho[inner] ** 2 + h * h) ** 1.5)
    rel = np.abs(sigma[inner] - exact) / np.abs(exact)
    assert np.max(rel) < 0.05


def test_singular_system_raises_solve_error():
    # two coincident panels give identical collocation rows
    verts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    mesh = PanelMesh(verts, np.array([[0, 1, 2], [0, 1, 2]]), np.array([GROUND, GROUND]))
    system = assemble(mesh, DomainSpec(r0=2.0, re=2.0), BemConfig(p=2, use_ground_kernel=False))
    set_point_source_rhs(system, (0.3, 0.3, 1.0))
    with pytest.raises(SolveError):
        solve(system)


def test_zero_rhs_warns(small_system):
    small_system.rhs = np.zeros(small_system.size)
    with pytest.warns(UserWarning, match="zero right-hand side"):
        sigma = solve(small_system)
    assert np.all(sigma == 0.0)
    set_point_source_rhs(small_system, (0.0, 0.0, 1.5))
    solve(small_system)


def test_boundary_potential_rhs(small_system):
    set_boundary_potential(small_system, lambda c: 1.0)
    on_s = small_system.mesh.tags == SURFACE
    assert np.all(small_system.rhs[on_s] == 1.0)
    assert np.all(small_system.rhs[~on_s] == 0.0)
    with pytest.raises(DomainError):
        set_boundary_potential(small_system, np.ones(3))


# ---------------------------------------------------------------------------
# Field evaluation
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def solved_disc():
    mesh = make_flat_disc_mesh(3.0, 0.18)
    system = assemble(mesh, DomainSpec(r0=3.0, re=3.0), BemConfig(p=2, use_ground_kernel=False))
    set_point_source_rhs(system, (0.0, 0.0, 0.5))
    solve(system)
    return system


def test_on_surface_potential_vanishes(solved_disc):
    mesh = solved_disc.mesh
    pick = mesh.centroids[np.hypot(mesh.centroids[:, 0], mesh.centroids[:, 1]) < 1.0][::5]
    grid = evaluate_field(solved_disc, pick, source=(0.0, 0.0, 0.5))
    scale = green((0, 0, 0), (0, 0, 0.5))
    assert np.abs(grid.values).max() < 5e-3 * scale


def test_field_matches_image_solution(solved_disc):
    pts = np.array([[0.3, 0.2, 0.4], [0.0, 0.0, 1.0], [0.6, -0.4, 0.3]])
    grid = evaluate_field(solved_disc, pts, source=(0.0, 0.0, 0.5))
    for p, v in zip(pts, grid.values):
        img = green(p, (0, 0, 0.5)) - green(p, (0, 0, -0.5))
        assert v == pytest.approx(img, abs=3e-3 * green(p, (0, 0, 0.5)))
    assert np.allclose(
        grid.induced, grid.values - [green(p, (0, 0, 0.5)) for p in pts]
    )


def test_far_field_decay(solved_disc):
    rads = np.array([20.0, 40.0, 80.0])
    pts = np.stack([rads, np.zeros(3), rads], axis=1) / math.sqrt(2)
    grid = evaluate_field(solved_disc, pts)
    vals = np.abs(grid.values)
    assert vals[0] / vals[1] > 1.8
    assert vals[1] / vals[2] > 1.8


def test_below_ground_flags(solved_disc):
    pts = np.array([[0.5, 0.0, 0.4], [0.5, 0.0, -0.4]])
    grid = evaluate_field(solved_disc, pts)
    assert not grid.flags[0]
    assert grid.flags[1]
    assert np.all(np.isfinite(grid.values))


def test_field_requires_solution():
    mesh = make_flat_disc_mesh(1.0, 0.4)
    system = assemble(mesh, DomainSpec(r0=1.0, re=1.0), BemConfig(p=2, use_ground_kernel=False))
    with pytest.raises(SolveError, match="no solution"):
        evaluate_field(system, np.array([[0.0, 0.0, 1.0]]))


def test_field_export_round_trip(solved_disc, tmp_path):
    import json

    pts = np.array([[0.3, 0.2, 0.4], [0.1, -0.2, 0.8]])
    grid = evaluate_field(solved_disc, pts, source=(0.0, 0.0, 0.5))
    csv_path = tmp_path / "field.csv"
    json_path = tmp_path / "field.json"
    export_field_csv(grid, csv_path)
    export_field_json(grid, json_path)
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "x,y,z,value,induced,below_ground"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert float(first[3]) == grid.values[0]
    payload = json.loads(json_path.read_text())
    assert payload["values"] == grid.values.tolist()
    assert payload["metadata"]["source"] == [0.0, 0.0, 0.5]

import numpy as np
import pytest

from cutvem.assembly import CoefficientField, assemble_system, edge_integrals
from cutvem.element import tri_curls, tri_gradients
from cutvem.harness import ConstantField, ManufacturedCase, compute_errors, solve_vem
from cutvem.verify import (
    PropertyConfig,
    embed_vem_dofs,
    energy_norm,
    fitted_triangulation,
    galerkin_oracle_solve,
    interface_aware_sides,
    interpolate_exact,
    quad_aspect,
    quad_checks,
    random_circles,
    random_cut_quads,
    run_property_suite,
)

CASE = ManufacturedCase()


def test_fitted_triangulation_covers_mesh(mesh10):
    ft = fitted_triangulation(mesh10)
    assert len(ft.triangles) == len(mesh10.triangles) + 2 * len(mesh10.quads)
    assert ft.n_edges == mesh10.n_edges
    # every edge is used, interior edges exactly twice
    counts = np.bincount(ft.tri_edges.ravel(), minlength=ft.n_edges)
    assert set(np.unique(counts)) == {1, 2}
    assert np.all(counts[np.flatnonzero(mesh10.boundary)] == 1)


def test_oracle_patch(mesh10):
    const = ConstantField((0.8, 0.25))
    sol = galerkin_oracle_solve(mesh10, const)
    np.testing.assert_allclose(sol.dofs, edge_integrals(mesh10, const.u), atol=1e-10)
    assert sol.e0 <= 1e-10 and sol.e1 <= 1e-10


def test_oracle_close_to_vem():
    vem = solve_vem(CASE, 20)
    orc = galerkin_oracle_solve(vem.mesh, CASE)
    assert 0.5 <= orc.e0 / vem.e0 <= 2.0 and 0.5 <= orc.e1 / vem.e1 <= 2.0


def test_embedded_vem_field_is_in_fitted_space(mesh10, rng):
    # the recovered diagonal DoFs give equal curls on both halves of each quad
    d = rng.standard_normal(mesh10.n_dofs)
    full = embed_vem_dofs(mesh10, d)
    ft = fitted_triangulation(mesh10)
    X = mesh10.vertices[ft.triangles]
    _, G = tri_gradients(X)
    curls = np.einsum("ni,ni->n", tri_curls(G), full[ft.tri_edges] * ft.tri_signs)
    nt, nq = len(mesh10.triangles), len(mesh10.quads)
    np.testing.assert_allclose(curls[nt:nt + nq], curls[nt + nq:], rtol=1e-10, atol=1e-10)


def test_interpolant_of_constant(mesh10):
    c = lambda p: np.broadcast_to([1.5, -0.5], np.shape(p)).copy()
    np.testing.assert_allclose(interpolate_exact(mesh10, c, c), edge_integrals(mesh10, c)[: mesh10.n_dofs])


def test_interpolant_picks_sides(mesh10):
    side = interface_aware_sides(mesh10)
    assert set(np.unique(side)) == {-1, 1}
    gam = np.flatnonzero(mesh10.gamma_edges[: mesh10.n_dofs])
    far = np.flatnonzero(~mesh10.gamma_edges[: mesh10.n_dofs])
    mid = mesh10.vertices[mesh10.edges[far]].mean(axis=1)
    inside = np.linalg.norm(mid, axis=1) < CASE.r1
    # off the discrete interface the side is unambiguous
    assert np.all(side[far][inside & (np.linalg.norm(mid, axis=1) < CASE.r1 - 0.1)] == -1)
    assert np.all(side[far][np.linalg.norm(mid, axis=1) > CASE.r1 + 0.1] == 1)
    vals = interpolate_exact(mesh10, lambda p: np.zeros_like(p), lambda p: np.ones_like(p))
    assert np.all((vals[gam] == 0) == (side[gam] < 0))


def test_energy_norm_zero_and_constant(mesh10):
    coeffs = CoefficientField()
    assert energy_norm(mesh10, np.zeros(mesh10.n_dofs), coeffs) == 0.0
    c = np.array([0.6, -0.8])
    d = edge_integrals(mesh10, lambda p: np.broadcast_to(c, np.shape(p)).copy())[: mesh10.n_dofs]
    # only the mass term survives: |c|^2 |Omega| = 4
    assert energy_norm(mesh10, d, coeffs) == pytest.approx(2.0, rel=1e-12)


def test_energy_norm_matches_stiffness(mesh10, rng):
    # the norm's stabilization term carries no beta, so the identity needs beta = 1
    coeffs = CoefficientField(1.0, 10.0, 1.0, 1.0)
    A = assemble_system(mesh10, coeffs, lambda p: np.zeros_like(p)).matrix
    d = rng.standard_normal(mesh10.n_dofs)
    assert energy_norm(mesh10, d, coeffs) ** 2 == pytest.approx(d @ (A @ d), rel=1e-12)


def test_random_quads_respect_aspect_cap(rng):
    Q, diag = random_cut_quads(rng, 200, max_aspect=1e4)
    a = quad_aspect(Q)
    assert a.max() <= 1e4 and a.max() > 100
    qc = quad_checks(Q, diag, rng.standard_normal((200, 4)), rng.standard_normal((200, 2)))
    assert qc.dof_error.max() <= 1e-10 and qc.diagonal_mismatch.max() <= 1e-10
    assert qc.curl_mismatch.max() <= 1e-10
    assert qc.constant_error.max() <= 1e-12 and qc.orthogonality.max() <= 1e-9
    assert qc.poincare.max() / qc.poincare.min() < 10


def test_random_circles_in_range(rng):
    cs = random_circles(rng, 50)
    assert all(abs(c.center).max() <= 0.3 and 0.3 <= c.radius <= 0.8 for c in cs)


def test_property_suite_small():
    rep = run_property_suite(1, PropertyConfig(n_circles=5, mesh_sizes=(16,), n_quads=100))
    names = [r.name for r in rep.results]
    assert names[:2] == ["max_angle_deg", "assumption_violations"]
    by = {r.name: r for r in rep.results}
    for key in ("max_angle_deg", "unisolvence", "sub_curls", "projection_constants",
                "projection_orthogonality", "poincare_spread"):
        assert by[key].passed, by[key].line()
    assert rep.text().startswith("seed=1")


def test_interpolation_error_against_vem(mesh10):
    res = solve_vem(CASE, 10, mesh=mesh10)
    ui = interpolate_exact(mesh10, CASE.u_minus, CASE.u_plus)
    e_int = compute_errors(mesh10, ui, CASE)
    # both are first-order approximations of the same field
    assert 0.3 < e_int[1] / res.e1 < 3.0

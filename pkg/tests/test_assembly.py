import numpy as np
import pytest
import scipy.sparse as sps

from cutvem.assembly import (
    CoefficientField,
    apply_dirichlet,
    assemble_system,
    assign_coefficients,
    boundary_values,
    edge_integrals,
    write_coo,
)
from cutvem.element import TriangleKernel, local_matrices_triangle
from cutvem.exceptions import MissingBoundaryValue
from cutvem.geometry import LevelSetInterface
from cutvem.harness import ManufacturedCase
from cutvem.mesh import build_background_mesh, cut_mesh


def constant(c):
    c = np.asarray(c, dtype=float)
    return lambda p: np.broadcast_to(c, np.shape(p)).copy()


@pytest.fixture(scope="module")
def jump():
    return CoefficientField(1.0, 10.0, 1.0, 10.0)


def test_coefficients_by_side(mesh10, jump):
    ec = assign_coefficients(mesh10, jump)
    inside = mesh10.tri_side < 0
    assert np.all(ec.tri_alpha[inside] == 1.0) and np.all(ec.tri_beta[inside] == 1.0)
    assert np.all(ec.tri_alpha[~inside] == 10.0)
    plus_q = mesh10.quad_side > 0
    assert plus_q.any() and np.all(ec.quad_beta[plus_q] == 10.0)
    same = assign_coefficients(mesh10, CoefficientField(2.0, 2.0, 3.0, 3.0))
    assert np.all(same.tri_alpha == 2.0) and np.all(same.quad_beta == 3.0)


def test_coefficients_positive():
    with pytest.raises(ValueError):
        CoefficientField(alpha_minus=0.0)


def test_patch_consistency(mesh10):
    beta = 2.5
    c = np.array([0.3, -1.1])
    sys = assemble_system(mesh10, CoefficientField(1.7, 1.7, beta, beta), constant(beta * c))
    d = edge_integrals(mesh10, constant(c))[: mesh10.n_dofs]
    np.testing.assert_allclose(sys.matrix @ d, sys.rhs, atol=1e-12)


def test_symmetric_and_sized(mesh10, jump):
    sys = assemble_system(mesh10, jump, constant([1.0, 0.0]))
    assert sys.size == mesh10.n_dofs
    assert (sys.matrix - sys.matrix.T).nnz == 0
    assert sys.matrix.has_sorted_indices


def test_single_element_scatter():
    bm = build_background_mesh(1, (0, 1, 0, 1))
    cm = cut_mesh(bm, LevelSetInterface(lambda p: p[..., 0] + 5.0))
    sys = assemble_system(cm, CoefficientField(2.0, 2.0, 3.0, 3.0), constant([0.0, 0.0]))
    for t in range(2):
        K = local_matrices_triangle(TriangleKernel(cm.tri_coords()[t], cm.tri_signs[t]), 2.0, 3.0)
        idx = cm.tri_edges[t]
        block = sys.matrix.toarray()[np.ix_(idx, idx)]
        # the shared diagonal receives both triangles; the other entries only this one
        other = cm.tri_edges[1 - t]
        mine = [k for k in range(3) if idx[k] not in other]
        np.testing.assert_allclose(block[np.ix_(mine, mine)], K[np.ix_(mine, mine)], atol=1e-14)
    A = sys.matrix.toarray()
    total = sum(
        np.zeros((5, 5)) + _embed(local_matrices_triangle(TriangleKernel(cm.tri_coords()[t], cm.tri_signs[t]), 2.0, 3.0),
                                  cm.tri_edges[t], 5)
        for t in range(2))
    np.testing.assert_allclose(A, total, atol=1e-14)


def _embed(K, idx, n):
    out = np.zeros((n, n))
    out[np.ix_(idx, idx)] = K
    return out


def test_dirichlet_zero_values(mesh10, jump):
    sys = assemble_system(mesh10, jump, constant([1.0, 2.0]))
    red = apply_dirichlet(sys, np.zeros(len(sys.dirichlet_dofs)))
    np.testing.assert_allclose(red.rhs, sys.rhs[red.free])
    assert red.matrix.shape == (len(red.free), len(red.free))


def test_dirichlet_all_fixed(mesh10, jump):
    sys = assemble_system(mesh10, jump, constant([1.0, 2.0]))
    vals = edge_integrals(mesh10, constant([1.0, 2.0]))[: mesh10.n_dofs]
    red = apply_dirichlet(sys, vals, dofs=np.arange(mesh10.n_dofs))
    assert len(red.free) == 0
    np.testing.assert_allclose(red.expand(np.zeros(0)), vals)


def test_dirichlet_missing(mesh10, jump):
    sys = assemble_system(mesh10, jump, constant([1.0, 2.0]))
    partial = {int(d): 0.0 for d in sys.dirichlet_dofs[1:]}
    with pytest.raises(MissingBoundaryValue):
        apply_dirichlet(sys, partial)
    with pytest.raises(MissingBoundaryValue):
        apply_dirichlet(sys, np.zeros(3))


def test_boundary_values_of_exact_solution(mesh10):
    case = ManufacturedCase()
    g5 = boundary_values(mesh10, case.u)
    assert np.all(np.abs(g5) > 1e-6)
    g10 = edge_integrals(mesh10, case.u, np.flatnonzero(mesh10.boundary), n_points=10)
    np.testing.assert_allclose(g5, g10, rtol=1e-13, atol=1e-15)


def test_orientation_independence(circle):
    bm = build_background_mesh(10)
    case = ManufacturedCase()
    coeffs = case.coefficients
    out = []
    for orient in ("lex", "reversed"):
        cm = cut_mesh(bm, circle, orientation=orient)
        sys = assemble_system(cm, coeffs, case.f)
        red = apply_dirichlet(sys, boundary_values(cm, case.u))
        x = red.expand(sps.linalg.spsolve(red.matrix.tocsc(), red.rhs))
        out.append((cm, sys, x))
    (a, sa, xa), (b, sb, xb) = out
    # every edge is reversed, so the signed similarity is D = -I
    assert abs(sa.matrix - sb.matrix).max() < 1e-12
    np.testing.assert_allclose(sa.rhs, -sb.rhs, atol=1e-12)
    np.testing.assert_allclose(xa, -xb, atol=1e-12)


def test_write_coo(tmp_path):
    M = sps.csr_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    p = tmp_path / "m.txt"
    write_coo(M, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "# 2 2 4"
    assert lines[1:] == ["0 0 2", "0 1 -1", "1 0 -1", "1 1 2"]

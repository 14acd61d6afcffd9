"""Independent checks: a fitted-mesh Galerkin comparator, the interface-aware
interpolant, the discrete energy norm and a seeded property suite."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import (
    CoefficientField,
    LinearSystem,
    _scatter,
    _signed,
    apply_dirichlet,
    assign_coefficients,
    boundary_values,
    edge_integrals,
    quad_geometry_of,
    triangle_rhs,
)
from .element import quad_geometry, quad_stabilization_rows, tri_curls, tri_gradients, tri_local_matrices, tri_mass
from .geometry import Circle
from .harness import PiecewiseProblem, piecewise_errors, whitney_affine
from .mesh import CutMesh, _diagonal_choice, build_background_mesh, certify, polygon_angles, triangle_areas
from .quadrature import segment_rule

log = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]

MAX_ANGLE_BOUND = 135.0


# ---------------------------------------------------------------------------
# fitted triangulation and Galerkin comparator


@dataclass
class FittedTriangulation:
    """All triangles of a cut mesh with each quad replaced by its two halves.

    Every edge of ``cm.edges`` (diagonals included) is a degree of freedom.
    """

    triangles: np.ndarray
    tri_edges: np.ndarray
    tri_signs: np.ndarray
    side: np.ndarray
    n_edges: int


def _edge_lookup(edges: np.ndarray, pairs: np.ndarray, n_vertices: int) -> np.ndarray:
    key = np.minimum(edges[:, 0], edges[:, 1]) * n_vertices + np.maximum(edges[:, 0], edges[:, 1])
    order = np.argsort(key)
    q = np.minimum(pairs[:, 0], pairs[:, 1]) * n_vertices + np.maximum(pairs[:, 0], pairs[:, 1])
    pos = np.searchsorted(key[order], q)
    found = order[np.minimum(pos, len(order) - 1)]
    if np.any(key[found] != q):
        raise ValueError("triangle edge missing from the edge list")
    return found


def fitted_triangulation(cm: CutMesh) -> FittedTriangulation:
    T1, T2 = cm.quad_split_triangles()
    tris = np.vstack([cm.triangles, T1, T2]).astype(np.int64)
    side = np.concatenate([cm.tri_side, cm.quad_side, cm.quad_side])
    pairs = np.stack([tris, np.roll(tris, -1, axis=1)], axis=-1).reshape(-1, 2)
    ids = _edge_lookup(cm.edges, pairs, len(cm.vertices)).reshape(-1, 3)
    signs = np.where(cm.edges[ids, 0] == tris, 1, -1)
    return FittedTriangulation(tris, ids, signs, side, len(cm.edges))


@dataclass
class OracleSolution:
    """Edge-element solution on the fitted triangulation (diagonals are free DoFs)."""

    dofs: np.ndarray
    fitted: FittedTriangulation
    element_e0: np.ndarray
    element_e1: np.ndarray
    iterations: int = 0

    @property
    def e0(self) -> float:
        return float(np.sqrt(self.element_e0.sum()))

    @property
    def e1(self) -> float:
        return float(np.sqrt(self.element_e1.sum()))


def assemble_fitted(cm: CutMesh, coeffs: CoefficientField, f: VectorField,
                    quad_degree: int = 6) -> tuple:
    """Standard lowest-order edge element system on the fitted triangulation."""
    ft = fitted_triangulation(cm)
    X = cm.vertices[ft.triangles]
    K = _signed(tri_local_matrices(X, coeffs.alpha(ft.side), coeffs.beta(ft.side)), ft.tri_signs)
    b = triangle_rhs(X, f, quad_degree) * ft.tri_signs
    A = _scatter(ft.n_edges, [ft.tri_edges], [K])
    rhs = np.bincount(ft.tri_edges.ravel(), weights=b.ravel(), minlength=ft.n_edges)
    return ft, LinearSystem(A, rhs, np.flatnonzero(cm.boundary))


def galerkin_oracle_solve(cm: CutMesh, case: PiecewiseProblem, quad_degree: int = 6) -> OracleSolution:
    """Solve the comparator with exact mass, no projection and no stabilization.

    The reduced system is factorized directly, so the comparator shares
    neither the VEM element matrices nor the iterative solver.
    """
    ft, system = assemble_fitted(cm, case.coefficients, case.f, quad_degree)
    red = apply_dirichlet(system, boundary_values(cm, case.u))
    x = red.expand(spla.spsolve(red.matrix.tocsc(), red.rhs))
    X = cm.vertices[ft.triangles]
    a, s, c = whitney_affine(X, x[ft.tri_edges] * ft.tri_signs)
    d0, d1 = piecewise_errors(X, np.arange(len(X)), a, s, c, case, quad_degree)
    return OracleSolution(x, ft, d0, d1)


def embed_vem_dofs(cm: CutMesh, dofs) -> np.ndarray:
    """Extend a VEM DoF vector by the recovered diagonal DoFs (global orientation)."""
    dofs = np.asarray(dofs, dtype=float)
    out = np.zeros(len(cm.edges))
    out[: cm.n_dofs] = dofs
    if len(cm.quads):
        g = quad_geometry_of(cm)
        gd = np.einsum("ni,ni->n", g.recovery, dofs[cm.quad_edges] * cm.quad_signs)
        out[cm.quad_diag_edge] = gd * cm.quad_diag_sign
    return out


# ---------------------------------------------------------------------------
# interpolation and energy norm


def interface_aware_sides(cm: CutMesh) -> np.ndarray:
    """Side whose exact piece defines each DoF: that of the smallest adjacent element.

    Off the discrete interface all neighbours agree.  On a discrete interface
    edge this picks ``u+`` when ``|K+| <= |K-|`` and ``u-`` otherwise.
    """
    at, aq = cm.element_areas()
    edge = np.concatenate([cm.tri_edges.ravel(), cm.quad_edges.ravel()])
    area = np.concatenate([np.repeat(np.abs(at), 3), np.repeat(np.abs(aq), 4)])
    side = np.concatenate([np.repeat(cm.tri_side, 3), np.repeat(cm.quad_side, 4)])
    order = np.lexsort((-side, area, edge))  # per edge: smallest area, plus side on ties
    e_sorted = edge[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = e_sorted[1:] != e_sorted[:-1]
    out = np.zeros(cm.n_dofs, dtype=np.int64)
    out[e_sorted[first]] = side[order][first]
    return out


def interpolate_exact(cm: CutMesh, u_minus: VectorField, u_plus: VectorField) -> np.ndarray:
    """Edge interpolant using globally evaluable pieces ``u-`` and ``u+``."""
    side = interface_aware_sides(cm)
    idx = np.arange(cm.n_dofs)
    vals = np.empty(cm.n_dofs)
    minus = side < 0
    if minus.any():
        vals[minus] = edge_integrals(cm, u_minus, idx[minus])
    if (~minus).any():
        vals[~minus] = edge_integrals(cm, u_plus, idx[~minus])
    return vals


def energy_norm(cm: CutMesh, dofs, coeffs: CoefficientField, gamma: float = 1.0) -> float:
    """``||alpha^1/2 curl v||^2 + ||beta^1/2 Pi v||^2 + gamma sum h_K ||(v - Pi v).t||^2``, square-rooted."""
    dofs = np.asarray(dofs, dtype=float)
    ec = assign_coefficients(cm, coeffs)
    X = cm.tri_coords()
    area, G = tri_gradients(X)
    loc = dofs[cm.tri_edges] * cm.tri_signs
    curl = np.einsum("ni,ni->n", tri_curls(G), loc)
    total = np.sum(ec.tri_alpha * np.abs(area) * curl ** 2)
    total += np.sum(ec.tri_beta * np.einsum("ni,nij,nj->n", loc, tri_mass(area, G), loc))
    if len(cm.quads):
        g = quad_geometry_of(cm)
        lq = dofs[cm.quad_edges] * cm.quad_signs
        cq = np.einsum("ni,ni->n", g.curl, lq)
        pv = np.einsum("ndi,ni->nd", g.projection, lq)
        jump = np.einsum("nei,ni->ne", quad_stabilization_rows(g), lq)
        total += np.sum(ec.quad_alpha * g.area * cq ** 2)
        total += np.sum(ec.quad_beta * g.area * np.sum(pv ** 2, axis=1))
        total += gamma * np.sum(cm.quad_h * np.sum(g.lengths * jump ** 2, axis=1))
    return float(np.sqrt(max(total, 0.0)))


# ---------------------------------------------------------------------------
# random cut quadrilaterals


def quad_aspect(Q: np.ndarray) -> np.ndarray:
    """``diam^2 / area`` of each polygon in ``Q`` (n, m, 2)."""
    diam = np.max(np.linalg.norm(Q[:, :, None] - Q[:, None, :], axis=-1), axis=(1, 2))
    area = triangle_areas(Q[:, [0, 1, 2]]) + triangle_areas(Q[:, [0, 2, 3]])
    return diam ** 2 / np.abs(area)


def random_cut_quads(rng: np.random.Generator, n: int, max_aspect: float = 1e4):
    """Quads left after cutting a corner off random triangles.

    The cut parameters are log-uniform towards both ends of each edge, giving
    thin strips, nearly full triangles and tiny corner cuts.  Samples with
    ``diam^2 / area`` above ``max_aspect`` are redrawn.  Returns ``(Q, diag)``
    with counterclockwise ``Q`` of shape (n, 4, 2).
    """
    out = np.empty((0, 4, 2))
    lo = np.log10(1.0 / max_aspect)
    while len(out) < n:
        m = 2 * (n - len(out))
        ang = rng.uniform(0.0, 2 * np.pi, m)
        a1 = ang + rng.uniform(-0.2, 0.2, m)
        a2 = ang + rng.uniform(np.pi / 6, 5 * np.pi / 6, m)
        r1 = rng.uniform(0.5, 2.0, m)
        r2 = rng.uniform(0.5, 2.0, m)
        T = np.zeros((m, 3, 2))
        T[:, 1] = np.column_stack([r1 * np.cos(a1), r1 * np.sin(a1)])
        T[:, 2] = np.column_stack([r2 * np.cos(a2), r2 * np.sin(a2)])
        T += rng.uniform(-1, 1, (m, 1, 2))

        def param():
            e = 10.0 ** rng.uniform(lo, 0.0, m)
            return np.where(rng.random(m) < 0.5, e, 1.0 - e)

        t1, t2 = param(), param()
        A, B, C = T[:, 0], T[:, 1], T[:, 2]
        D = A + t1[:, None] * (B - A)
        E = A + t2[:, None] * (C - A)
        Q = np.stack([E, D, B, C], axis=1)
        cw = triangle_areas(T) < 0
        Q[cw] = Q[cw][:, ::-1]
        out = np.concatenate([out, Q[quad_aspect(Q) <= max_aspect]])
    out = out[:n]
    return out, _diagonal_choice(out)


def _whitney_on_points(X: np.ndarray, loc: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Evaluate the Whitney field of triangles ``X`` (n,3,2) at points ``P`` (n,m,2)."""
    _, G = tri_gradients(X)
    lam = np.einsum("nid,nmd->nmi", G, P) - np.einsum("nid,nid->ni", G, np.roll(X, -1, axis=1))[:, None, :]
    lam_next = np.roll(lam, -1, axis=2)
    Gn = np.roll(G, -1, axis=1)
    W = lam[..., None] * Gn[:, None] - lam_next[..., None] * G[:, None]
    return np.einsum("nmid,ni->nmd", W, loc)


def _segment_dofs(X: np.ndarray, loc: np.ndarray, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    s, w = segment_rule(5)
    d = p1 - p0
    pts = p0[:, None, :] + s[None, :, None] * d[:, None, :]
    return np.einsum("q,nqd,nd->n", w, _whitney_on_points(X, loc, pts), d)


@dataclass
class QuadChecks:
    dof_error: np.ndarray
    diagonal_mismatch: np.ndarray
    curl_mismatch: np.ndarray
    constant_error: np.ndarray
    orthogonality: np.ndarray
    poincare: np.ndarray
    aspect: np.ndarray


def quad_checks(Q: np.ndarray, diag: np.ndarray, dofs: np.ndarray, const: np.ndarray) -> QuadChecks:
    """Unisolvence, curl, projection and Poincare statistics for a quad batch."""
    g = quad_geometry(Q, diag)
    n = len(Q)
    sub = np.einsum("nkjl,nl->nkj", g.expansion, dofs)  # (n, 2, 3)
    T1, T2 = g.sub_coords[:, 0], g.sub_coords[:, 1]
    roll = (np.arange(4)[None, :] + diag[:, None]) % 4
    R = np.take_along_axis(Q, roll[..., None], axis=1)

    # recompute the four boundary DoFs from the piecewise field
    rec = np.empty((n, 4))
    for r, (X, loc) in enumerate(((T1, sub[:, 0]), (T1, sub[:, 0]), (T2, sub[:, 1]), (T2, sub[:, 1]))):
        val = _segment_dofs(X, loc, R[:, r], R[:, (r + 1) % 4])
        rec[np.arange(n), roll[:, r]] = val
    scale = np.maximum(np.abs(dofs).max(axis=1), 1e-300)
    dof_error = np.abs(rec - dofs).max(axis=1) / scale
    gd1 = -_segment_dofs(T1, sub[:, 0], R[:, 2], R[:, 0])
    gd2 = _segment_dofs(T2, sub[:, 1], R[:, 0], R[:, 2])
    gd = np.einsum("ni,ni->n", g.recovery, dofs)
    diag_mis = np.maximum(np.abs(gd1 - gd), np.abs(gd2 - gd)) / scale

    # Stokes on each half; compared normwise against the size of the summands
    a1, a2 = g.sub_area[:, 0], g.sub_area[:, 1]
    c1 = sub[:, 0].sum(axis=1) / a1
    c2 = sub[:, 1].sum(axis=1) / a2
    size = np.maximum(np.abs(sub[:, 0]).sum(axis=1) / a1, np.abs(sub[:, 1]).sum(axis=1) / a2)
    curl_mis = np.abs(c1 - c2) / np.maximum(size, 1e-300)

    # projection of the DoFs of a constant
    cdofs = np.einsum("nkd,nd->nk", np.roll(Q, -1, axis=1) - Q, const)
    pc = np.einsum("ndi,ni->nd", g.projection, cdofs)
    const_err = np.linalg.norm(pc - const, axis=1) / np.linalg.norm(const, axis=1)

    # orthogonality: the piecewise field is linear on each half, so its centroid value is exact
    cen1 = _whitney_on_points(T1, sub[:, 0], T1.mean(axis=1)[:, None])[:, 0]
    cen2 = _whitney_on_points(T2, sub[:, 1], T2.mean(axis=1)[:, None])[:, 0]
    pv = np.einsum("ndi,ni->nd", g.projection, dofs)
    resid = a1[:, None] * cen1 + a2[:, None] * cen2 - g.area[:, None] * pv
    norm = a1 * np.linalg.norm(cen1, axis=1) + a2 * np.linalg.norm(cen2, axis=1)
    ortho = np.abs(resid).max(axis=1) / np.maximum(norm, 1e-300)

    poincare = _poincare_constants(g, T1, T2)
    return QuadChecks(dof_error, diag_mis, curl_mis, const_err, ortho, poincare, quad_aspect(Q))


def _poincare_constants(g, T1, T2) -> np.ndarray:
    """Best constant ``C`` in ``||v||^2 <= C^2 (h ||v.t||^2_bd + h^2 ||curl v||^2)`` per quad.

    Both sides are quadratic forms in the four boundary DoFs, so the
    constant is the top generalized eigenvalue of a 4x4 pencil.
    """
    n = len(g.area)
    a1, G1 = tri_gradients(T1)
    a2, G2 = tri_gradients(T2)
    E1, E2 = g.expansion[:, 0], g.expansion[:, 1]
    M = np.einsum("nki,nkl,nlj->nij", E1, tri_mass(a1, G1), E1) + np.einsum("nki,nkl,nlj->nij", E2, tri_mass(a2, G2), E2)
    Q = g.Q
    h = np.max(np.linalg.norm(Q[:, :, None] - Q[:, None, :], axis=-1), axis=(1, 2))
    B = h[:, None, None] * np.einsum("ij,nj->nij", np.eye(4), 1.0 / g.lengths)
    B += (h ** 2)[:, None, None] * g.area[:, None, None] * g.curl[:, :, None] * g.curl[:, None, :]
    out = np.empty(n)
    for k in range(n):
        L = np.linalg.cholesky(B[k])
        Li = np.linalg.inv(L)
        out[k] = np.sqrt(np.linalg.eigvalsh(Li @ M[k] @ Li.T).max())
    return out


# ---------------------------------------------------------------------------
# property suite


@dataclass
class PropertyConfig:
    n_circles: int = 100
    mesh_sizes: Sequence[int] = (8, 16, 32)
    center_range: float = 0.3
    radius_range: tuple = (0.3, 0.8)
    n_quads: int = 1000
    max_aspect: float = 1e4
    gamma_values: Sequence[float] = ()
    gamma_sizes: Sequence[int] = (10, 20, 40)


@dataclass
class PropertyResult:
    name: str
    worst: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{self.name}: worst={self.worst:.6g} {status}{extra}"


@dataclass
class PropertyReport:
    seed: int
    results: List[PropertyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def text(self) -> str:
        return "\n".join([f"seed={self.seed}"] + [r.line() for r in self.results])


def random_circles(rng: np.random.Generator, n: int, center_range: float = 0.3, radius_range=(0.3, 0.8)):
    cx = rng.uniform(-center_range, center_range, n)
    cy = rng.uniform(-center_range, center_range, n)
    r = rng.uniform(*radius_range, n)
    return [Circle(float(ri), (float(x), float(y))) for x, y, ri in zip(cx, cy, r)]


def max_angle_sweep(circles, mesh_sizes) -> List[PropertyResult]:
    """Certificates over circles x mesh sizes: angle bound and assumption counts."""
    worst, measured, viol_a, viol_b = 0.0, 0, 0, 0
    meshes = {n: build_background_mesh(n) for n in mesh_sizes}
    for c in circles:
        for bm in meshes.values():
            cert = certify(bm, c)
            viol_a += int(not cert.assumption_a)
            viol_b += int(not cert.assumption_b)
            if not math.isnan(cert.max_angle):
                worst = max(worst, math.degrees(cert.max_angle))
                measured += 1
    total = len(circles) * len(meshes)
    return [
        PropertyResult("max_angle_deg", worst, worst <= MAX_ANGLE_BOUND + 1e-12,
                       f"{measured}/{total} meshes cut"),
        PropertyResult("assumption_violations", float(viol_a + viol_b), viol_a + viol_b == 0,
                       f"{viol_a} (A) and {viol_b} (B) over {total} meshes"),
    ]


def gamma_robustness(gammas, sizes) -> PropertyResult:
    from .harness import ManufacturedCase, solve_vem

    case = ManufacturedCase()
    worst = np.inf
    for gk in gammas:
        errs = [solve_vem(case, n, gamma_k=gk) for n in sizes]
        for a, b in zip(errs, errs[1:]):
            worst = min(worst, math.log2(a.e0 / b.e0), math.log2(a.e1 / b.e1))
    return PropertyResult("gamma_rates", worst, worst >= 0.9, f"gamma in {list(gammas)}")


def run_property_suite(seed: int = 0, config: Optional[PropertyConfig] = None) -> PropertyReport:
    """Seeded sweep over random interfaces and random cut quadrilaterals."""
    cfg = config or PropertyConfig()
    log.info("property suite seed=%d", seed)
    rng = np.random.default_rng(seed)
    rep = PropertyReport(seed)

    circles = random_circles(rng, cfg.n_circles, cfg.center_range, cfg.radius_range)
    rep.results.extend(max_angle_sweep(circles, cfg.mesh_sizes))

    Q, diag = random_cut_quads(rng, cfg.n_quads, cfg.max_aspect)
    dofs = rng.standard_normal((cfg.n_quads, 4))
    const = rng.standard_normal((cfg.n_quads, 2))
    qc = quad_checks(Q, diag, dofs, const)
    worst = float(max(qc.dof_error.max(), qc.diagonal_mismatch.max()))
    rep.results.append(PropertyResult("unisolvence", worst, worst <= 1e-10,
                                      f"max aspect {qc.aspect.max():.3g}"))
    rep.results.append(PropertyResult("sub_curls", float(qc.curl_mismatch.max()), qc.curl_mismatch.max() <= 1e-10))
    rep.results.append(PropertyResult("projection_constants", float(qc.constant_error.max()),
                                      qc.constant_error.max() <= 1e-12))
    rep.results.append(PropertyResult("projection_orthogonality", float(qc.orthogonality.max()),
                                      qc.orthogonality.max() <= 1e-9))
    spread = float(qc.poincare.max() / qc.poincare.min())
    rep.results.append(PropertyResult("poincare_spread", spread, spread < 10.0,
                                      f"C in [{qc.poincare.min():.4g}, {qc.poincare.max():.4g}]"))

    angles = np.degrees(polygon_angles(Q).max(axis=1))
    rep.results.append(PropertyResult("quad_convexity_deg", float(angles.max()), bool(angles.max() < 180.0)))

    if cfg.gamma_values:
        rep.results.append(gamma_robustness(cfg.gamma_values, cfg.gamma_sizes))
    return rep

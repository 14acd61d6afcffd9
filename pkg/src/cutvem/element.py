"""Local kernels for the lowest-order edge element and the quadrilateral
virtual element.

Degrees of freedom are tangential line integrals ``int_e v.t ds``.  All local
quantities are first formed in the counterclockwise local orientation (edge
``k`` runs from vertex ``k`` to ``k+1``) and converted to the global
orientation with the per-edge signs.

The batched functions (``tri_*``, ``quad_*``) take coordinate arrays with a
leading element axis and are what the assembly uses; the single-element
classes and functions wrap them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DegenerateTriangle
from .mesh import quad_subtriangles, split_quad, triangle_areas
from .quadrature import EDGE_MIDPOINT_RULE, segment_rule

DEGENERATE_TOL = 1e-14


# ---------------------------------------------------------------------------
# triangles (batched)


def tri_gradients(X: np.ndarray):
    """Signed areas (n,) and barycentric gradients (n, 3, 2) of triangles X."""
    X = np.asarray(X, dtype=float)
    area = triangle_areas(X)
    h2 = np.max(np.sum((X - np.roll(X, -1, axis=1)) ** 2, axis=-1), axis=1)
    if np.any(np.abs(area) < DEGENERATE_TOL * h2):
        raise DegenerateTriangle("triangle area below 1e-14 h^2")
    d = np.roll(X, -2, axis=1) - np.roll(X, -1, axis=1)  # x_{i+2} - x_{i+1}
    G = np.stack([-d[..., 1], d[..., 0]], axis=-1) / (2.0 * area[:, None, None])
    return area, G


def tri_whitney(G: np.ndarray, bary: np.ndarray) -> np.ndarray:
    """Whitney functions at barycentric points: (n, m, 3, 2), local orientation."""
    Gn = np.roll(G, -1, axis=1)
    lam = bary[None, :, :, None]
    lam_next = np.roll(bary, -1, axis=1)[None, :, :, None]
    return lam * Gn[:, None] - lam_next * G[:, None]


def tri_curls(G: np.ndarray) -> np.ndarray:
    """Constant curls (n, 3) of the local Whitney functions."""
    Gn = np.roll(G, -1, axis=1)
    return 2.0 * (G[..., 0] * Gn[..., 1] - G[..., 1] * Gn[..., 0])


def tri_mass(area: np.ndarray, G: np.ndarray) -> np.ndarray:
    bary, w = EDGE_MIDPOINT_RULE
    W = tri_whitney(G, bary)
    return np.einsum("n,q,nqid,nqjd->nij", np.abs(area), w, W, W)


def tri_local_matrices(X: np.ndarray, alpha, beta) -> np.ndarray:
    """``alpha |T| c c^T + beta M`` per triangle, local orientation."""
    area, G = tri_gradients(X)
    c = tri_curls(G)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), area.shape)
    beta = np.broadcast_to(np.asarray(beta, dtype=float), area.shape)
    K = (alpha * np.abs(area))[:, None, None] * c[:, :, None] * c[:, None, :]
    return K + beta[:, None, None] * tri_mass(area, G)


# ---------------------------------------------------------------------------
# quadrilaterals (batched)


@dataclass
class QuadGeometry:
    """Batched quantities for convex quads split by a diagonal.

    All DoF-indexed arrays use the original local vertex order and the
    counterclockwise local orientation.
    """

    Q: np.ndarray  # (n, 4, 2)
    diag: np.ndarray  # (n,)
    area: np.ndarray
    sub_area: np.ndarray  # (n, 2)
    sub_coords: np.ndarray  # (n, 2, 3, 2)
    centroid: np.ndarray  # (n, 2)
    recovery: np.ndarray  # (n, 4): diagonal DoF (q_d -> q_{d+2}) from boundary DoFs
    curl: np.ndarray  # (n, 4)
    projection: np.ndarray  # (n, 2, 4)
    expansion: np.ndarray  # (n, 2, 3, 4): sub-triangle local DoFs from boundary DoFs
    lengths: np.ndarray  # (n, 4)
    tangents: np.ndarray  # (n, 4, 2)


def quad_geometry(Q: np.ndarray, diag) -> QuadGeometry:
    Q = np.asarray(Q, dtype=float)
    n = len(Q)
    diag = np.broadcast_to(np.asarray(diag, dtype=np.int64), (n,))
    roll = (np.arange(4)[None, :] + diag[:, None]) % 4  # rolled position -> original index
    R = np.take_along_axis(Q, roll[..., None], axis=1)
    T1 = R[:, [0, 1, 2]]
    T2 = R[:, [0, 2, 3]]
    a1 = triangle_areas(T1)
    a2 = triangle_areas(T2)
    area = a1 + a2
    centroid = (a1[:, None] * T1.mean(axis=1) + a2[:, None] * T2.mean(axis=1)) / area[:, None]

    rec_rolled = np.stack([a2, a2, -a1, -a1], axis=1) / area[:, None]
    inv = np.argsort(roll, axis=1)  # original index -> rolled position
    recovery = np.take_along_axis(rec_rolled, inv, axis=1)

    curl = np.broadcast_to(1.0 / area[:, None], (n, 4)).copy()

    edge_vec = np.roll(Q, -1, axis=1) - Q
    lengths = np.linalg.norm(edge_vec, axis=-1)
    tangents = edge_vec / lengths[..., None]
    mid = 0.5 * (Q + np.roll(Q, -1, axis=1))
    P = np.empty((n, 2, 4))
    P[:, 0, :] = (centroid[:, None, 1] - mid[..., 1]) / area[:, None]
    P[:, 1, :] = -(centroid[:, None, 0] - mid[..., 0]) / area[:, None]

    # sub-triangle DoFs: T1 = (r0, r1, r2) edges (g'0, g'1, -gd); T2 = (r0, r2, r3) edges (gd, g'2, g'3)
    unit = np.zeros((n, 4, 4))
    unit[np.arange(n)[:, None], np.arange(4)[None, :], roll] = 1.0  # rolled edge k -> original
    Ex = np.empty((n, 2, 3, 4))
    Ex[:, 0, 0] = unit[:, 0]
    Ex[:, 0, 1] = unit[:, 1]
    Ex[:, 0, 2] = -recovery
    Ex[:, 1, 0] = recovery
    Ex[:, 1, 1] = unit[:, 2]
    Ex[:, 1, 2] = unit[:, 3]
    return QuadGeometry(Q, diag, area, np.column_stack([a1, a2]), np.stack([T1, T2], axis=1),
                        centroid, recovery, curl, P, Ex, lengths, tangents)


def quad_stabilization_rows(g: QuadGeometry) -> np.ndarray:
    """Rows ``delta_e/|e| - t_e . P`` giving ``(v - Pi v).t`` on each edge: (n, 4, 4)."""
    tP = np.einsum("ned,ndj->nej", g.tangents, g.projection)
    return np.eye(4)[None] / g.lengths[:, :, None] - tP


def quad_local_matrices(g: QuadGeometry, alpha, beta, gamma, h) -> np.ndarray:
    n = len(g.area)
    alpha, beta, gamma, h = (np.broadcast_to(np.asarray(v, dtype=float), (n,)) for v in (alpha, beta, gamma, h))
    K = (alpha * g.area)[:, None, None] * g.curl[:, :, None] * g.curl[:, None, :]
    M = (beta * g.area)[:, None, None] * np.einsum("ndi,ndj->nij", g.projection, g.projection)
    B = quad_stabilization_rows(g)
    S = (gamma * h * beta)[:, None, None] * np.einsum("ne,nei,nej->nij", g.lengths, B, B)
    return K + M + S


# ---------------------------------------------------------------------------
# single-element interface


def edge_dofs(vertices, field, n_points: int = 5) -> np.ndarray:
    """Counterclockwise tangential integrals of ``field`` over polygon edges."""
    X = np.asarray(vertices, dtype=float)
    s, w = segment_rule(n_points)
    d = np.roll(X, -1, axis=0) - X
    pts = X[:, None, :] + s[None, :, None] * d[:, None, :]
    vals = np.asarray(field(pts), dtype=float)
    return np.einsum("q,eqd,ed->e", w, vals, d)


@dataclass
class TriangleKernel:
    """A triangle with its three edge DoFs.

    ``signs[k]`` is +1 when the global orientation of local edge ``k``
    (vertex ``k`` to ``k+1``) agrees with the counterclockwise traversal.
    """

    vertices: np.ndarray
    signs: Optional[np.ndarray] = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if triangle_areas(self.vertices) <= 0:
            raise ValueError("triangle vertices must be counterclockwise")
        self.signs = np.ones(3) if self.signs is None else np.asarray(self.signs, dtype=float)
        area, G = tri_gradients(self.vertices[None])
        self.area = float(area[0])
        self.grad_lambda = G[0]

    @property
    def curls(self) -> np.ndarray:
        return self.signs * tri_curls(self.grad_lambda[None])[0]

    def barycentric(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        lam12 = np.einsum("kd,...d->...k", self.grad_lambda[1:], p - self.vertices[0])
        return np.concatenate([1.0 - lam12.sum(axis=-1, keepdims=True), lam12], axis=-1)

    def basis(self, p) -> np.ndarray:
        """Basis values with shape ``p.shape[:-1] + (3, 2)``."""
        p = np.asarray(p, dtype=float)
        lam = self.barycentric(p.reshape(-1, 2))
        W = tri_whitney(self.grad_lambda[None], lam)[0] * self.signs[None, :, None]
        return W.reshape(p.shape[:-1] + (3, 2))

    def dofs(self, field) -> np.ndarray:
        return self.signs * edge_dofs(self.vertices, field)

    def evaluate(self, dofs, p) -> np.ndarray:
        return np.einsum("...id,i->...d", self.basis(p), np.asarray(dofs, dtype=float))

    def mass(self) -> np.ndarray:
        M = tri_mass(np.array([self.area]), self.grad_lambda[None])[0]
        return M * np.outer(self.signs, self.signs)


def nedelec_basis(tri: TriangleKernel, p) -> np.ndarray:
    """Values (3, 2) of the edge basis functions at ``p``."""
    return tri.basis(p)


def element_curl_from_dofs(vertices, dofs, signs=None) -> float:
    """Constant curl of a field on a polygon from its boundary DoFs.

    ``dofs[k]`` belongs to the edge from vertex ``k`` to ``k+1``; ``signs``
    converts global orientation to the counterclockwise traversal.
    """
    X = np.asarray(vertices, dtype=float)
    x, y = X[:, 0], X[:, 1]
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    s = np.ones(len(X)) if signs is None else np.asarray(signs, dtype=float)
    return float(np.dot(s, dofs) / area)


def local_matrices_triangle(tri: TriangleKernel, alpha: float, beta: float) -> np.ndarray:
    A = tri_local_matrices(tri.vertices[None], alpha, beta)[0]
    return A * np.outer(tri.signs, tri.signs)


@dataclass
class QuadKernel:
    """A convex quadrilateral split into two triangles by a diagonal.

    Boundary DoFs use the counterclockwise traversal unless ``signs`` is
    given.  ``diag`` is 0 for the diagonal q0-q2 and 1 for q1-q3; by default
    the Delaunay diagonal is chosen.
    """

    vertices: np.ndarray
    diag: Optional[int] = None
    signs: Optional[np.ndarray] = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if self.diag is None:
            self.diag, _ = split_quad(self.vertices)
        self.signs = np.ones(4) if self.signs is None else np.asarray(self.signs, dtype=float)
        self.geom = quad_geometry(self.vertices[None], self.diag)

    @property
    def area(self) -> float:
        return float(self.geom.area[0])

    @property
    def centroid(self) -> np.ndarray:
        return self.geom.centroid[0]

    @property
    def recovery(self) -> np.ndarray:
        return self.geom.recovery[0] * self.signs

    @property
    def curl_row(self) -> np.ndarray:
        return self.geom.curl[0] * self.signs

    @property
    def projection(self) -> np.ndarray:
        return self.geom.projection[0] * self.signs[None, :]

    def subtriangles(self):
        """Local vertex indices of the two sub-triangles."""
        return quad_subtriangles(int(self.diag))

    def sub_kernels(self):
        return [TriangleKernel(self.geom.sub_coords[0, i]) for i in range(2)]

    def sub_dofs(self, dofs) -> np.ndarray:
        """Local (counterclockwise) DoFs of both sub-triangles, shape (2, 3)."""
        return np.einsum("tkj,j->tk", self.geom.expansion[0], self.signs * np.asarray(dofs, dtype=float))

    def dofs(self, field) -> np.ndarray:
        return self.signs * edge_dofs(self.vertices, field)


def recover_interior_dof(quad: QuadKernel, boundary_dofs) -> float:
    """DoF on the diagonal (oriented q_d -> q_{d+2}) making the curl constant."""
    return float(np.dot(quad.recovery, boundary_dofs))


def l2_projection_matrix(quad: QuadKernel) -> np.ndarray:
    """2x4 matrix mapping boundary DoFs to the constant L2 projection."""
    return quad.projection


def local_matrices_quad(quad: QuadKernel, alpha: float, beta: float, gamma_k: float, h_k: float) -> np.ndarray:
    A = quad_local_matrices(quad.geom, alpha, beta, gamma_k, h_k)[0]
    return A * np.outer(quad.signs, quad.signs)


def stabilization_quad(quad: QuadKernel, beta: float, gamma_k: float, h_k: float) -> np.ndarray:
    B = quad_stabilization_rows(quad.geom)[0]
    S = gamma_k * h_k * beta * np.einsum("e,ei,ej->ij", quad.geom.lengths[0], B, B)
    return S * np.outer(quad.signs, quad.signs)

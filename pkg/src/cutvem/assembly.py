"""Global assembly of the edge VEM system and Dirichlet elimination."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Union

import numpy as np
import scipy.sparse as sps

from .element import quad_geometry, quad_local_matrices, tri_gradients, tri_local_matrices, tri_whitney
from .exceptions import MissingBoundaryValue
from .mesh import CutMesh
from .quadrature import map_points, segment_rule, triangle_rule

VectorField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CoefficientField:
    """Piecewise-constant ``alpha`` (curl-curl) and ``beta`` (mass) coefficients."""

    alpha_minus: float = 1.0
    alpha_plus: float = 1.0
    beta_minus: float = 1.0
    beta_plus: float = 1.0

    def __post_init__(self):
        if min(self.alpha_minus, self.alpha_plus, self.beta_minus, self.beta_plus) <= 0:
            raise ValueError("coefficients must be positive")

    def alpha(self, side) -> np.ndarray:
        return np.where(np.asarray(side) < 0, self.alpha_minus, self.alpha_plus)

    def beta(self, side) -> np.ndarray:
        return np.where(np.asarray(side) < 0, self.beta_minus, self.beta_plus)


@dataclass
class ElementCoefficients:
    tri_alpha: np.ndarray
    tri_beta: np.ndarray
    quad_alpha: np.ndarray
    quad_beta: np.ndarray


def assign_coefficients(cm: CutMesh, coeffs: CoefficientField) -> ElementCoefficients:
    """Resolve the coefficients element by element from the side tags.

    Side tags come from the discrete interface, so elements in the sliver
    between the true and the discrete interface take the discrete side.
    """
    return ElementCoefficients(coeffs.alpha(cm.tri_side), coeffs.beta(cm.tri_side),
                               coeffs.alpha(cm.quad_side), coeffs.beta(cm.quad_side))


@dataclass
class LinearSystem:
    matrix: sps.csr_matrix
    rhs: np.ndarray
    dirichlet_dofs: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass
class ReducedSystem:
    matrix: sps.csr_matrix
    rhs: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    size: int

    def expand(self, x_free) -> np.ndarray:
        x = np.empty(self.size)
        x[self.free] = x_free
        x[self.fixed] = self.fixed_values
        return x


def _scatter(n: int, dofs_list, mats_list) -> sps.csr_matrix:
    rows, cols, vals = [], [], []
    for dofs, mats in zip(dofs_list, mats_list):
        if len(dofs) == 0:
            continue
        k = dofs.shape[1]
        rows.append(np.repeat(dofs, k, axis=1).ravel())
        cols.append(np.tile(dofs, (1, k)).ravel())
        vals.append(mats.ravel())
    if not rows:
        return sps.csr_matrix((n, n))
    A = sps.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(n, n)).tocsr()
    A.sum_duplicates()
    # mirror the upper triangle so symmetry is exact
    U = sps.triu(A, k=1)
    A = (sps.triu(A, k=0) + U.T).tocsr()
    A.sort_indices()
    return A


def _signed(K: np.ndarray, signs: np.ndarray) -> np.ndarray:
    K = 0.5 * (K + np.swapaxes(K, 1, 2))
    return K * signs[:, :, None] * signs[:, None, :]


def triangle_rhs(X: np.ndarray, f: VectorField, degree: int) -> np.ndarray:
    """``int_T f . w_i`` for the local Whitney functions, shape (n, 3)."""
    bary, w = triangle_rule(degree)
    area, G = tri_gradients(X)
    W = tri_whitney(G, bary)
    F = f(map_points(X, bary))
    return np.einsum("n,q,nqd,nqid->ni", np.abs(area), w, F, W)


def integrate_over_triangles(X: np.ndarray, f: VectorField, degree: int) -> np.ndarray:
    bary, w = triangle_rule(degree)
    area = np.abs(0.5 * ((X[:, 1, 0] - X[:, 0, 0]) * (X[:, 2, 1] - X[:, 0, 1])
                         - (X[:, 1, 1] - X[:, 0, 1]) * (X[:, 2, 0] - X[:, 0, 0])))
    F = np.asarray(f(map_points(X, bary)))
    return np.einsum("n,q,nq...->n...", area, w, F)


def quad_geometry_of(cm: CutMesh):
    return quad_geometry(cm.quad_coords(), cm.quad_diag)


def assemble_system(cm: CutMesh, coeffs: CoefficientField, f: VectorField,
                    quad_degree: int = 6, gamma_k: float = 1.0) -> LinearSystem:
    """Stiffness matrix and load vector over all DoF edges (no constraints)."""
    ec = assign_coefficients(cm, coeffs)
    n = cm.n_dofs
    Xt = cm.tri_coords()
    Kt = _signed(tri_local_matrices(Xt, ec.tri_alpha, ec.tri_beta), cm.tri_signs)
    bt = triangle_rhs(Xt, f, quad_degree) * cm.tri_signs

    dofs_list, mats_list = [cm.tri_edges], [Kt]
    rhs = np.bincount(cm.tri_edges.ravel(), weights=bt.ravel(), minlength=n)
    if len(cm.quads):
        g = quad_geometry_of(cm)
        Kq = _signed(quad_local_matrices(g, ec.quad_alpha, ec.quad_beta, gamma_k, cm.quad_h), cm.quad_signs)
        Fq = integrate_over_triangles(g.sub_coords[:, 0], f, quad_degree) \
            + integrate_over_triangles(g.sub_coords[:, 1], f, quad_degree)
        bq = np.einsum("nd,ndi->ni", Fq, g.projection) * cm.quad_signs
        dofs_list.append(cm.quad_edges)
        mats_list.append(Kq)
        rhs += np.bincount(cm.quad_edges.ravel(), weights=bq.ravel(), minlength=n)
    A = _scatter(n, dofs_list, mats_list)
    return LinearSystem(A, rhs, np.flatnonzero(cm.boundary))


def edge_integrals(cm: CutMesh, u: VectorField, edges=None, n_points: int = 5) -> np.ndarray:
    """``int_e u . t ds`` along the global orientation of the given edges."""
    E = cm.edges if edges is None else cm.edges[edges]
    s, w = segment_rule(n_points)
    A = cm.vertices[E[:, 0]]
    d = cm.vertices[E[:, 1]] - A
    pts = A[:, None, :] + s[None, :, None] * d[:, None, :]
    return np.einsum("q,eqd,ed->e", w, u(pts), d)


def boundary_values(cm: CutMesh, u: VectorField) -> np.ndarray:
    """Tangential DoFs of ``u`` on the boundary edges (5-point Gauss)."""
    return edge_integrals(cm, u, np.flatnonzero(cm.boundary))


def apply_dirichlet(system: LinearSystem, values: Union[np.ndarray, Mapping[int, float]],
                    dofs: Optional[np.ndarray] = None) -> ReducedSystem:
    """Fix ``dofs`` (default: the boundary DoFs) and eliminate them symmetrically."""
    fixed = system.dirichlet_dofs if dofs is None else np.asarray(dofs, dtype=np.int64)
    if isinstance(values, Mapping):
        missing = [int(d) for d in fixed if int(d) not in values]
        if missing:
            raise MissingBoundaryValue(f"no value for {len(missing)} constrained DoF(s), e.g. {missing[:5]}")
        g = np.array([values[int(d)] for d in fixed], dtype=float)
    else:
        g = np.asarray(values, dtype=float)
        if g.shape != fixed.shape or np.any(np.isnan(g)):
            raise MissingBoundaryValue("boundary values must be given for every constrained DoF")
    n = system.size
    mask = np.ones(n, dtype=bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    A = system.matrix
    A_ff = A[free][:, free].tocsr()
    b_f = system.rhs[free] - A[free][:, fixed] @ g
    return ReducedSystem(A_ff, b_f, free, fixed, g, n)


def write_coo(matrix, path) -> None:
    """Dump a sparse matrix as ``row col value`` lines."""
    C = sps.coo_matrix(matrix)
    order = np.lexsort((C.col, C.row))
    with open(path, "w") as fh:
        fh.write(f"# {C.shape[0]} {C.shape[1]} {C.nnz}\n")
        for i, j, v in zip(C.row[order], C.col[order], C.data[order]):
            fh.write(f"{i} {j} {v:.17g}\n")

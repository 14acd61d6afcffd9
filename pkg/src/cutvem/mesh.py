"""Background triangulation, interface cutting and geometric certification.

A background triangle crossed by the interface is replaced by a triangle
``K^t`` (apex + the two cut points) and a convex quadrilateral ``K^q``.  The
quadrilateral is split by its Delaunay diagonal; the diagonal is an edge of
the mesh but carries no global degree of freedom.

Edges of the cut mesh are numbered so that the first ``n_dofs`` edges are the
DoF edges and the quad diagonals come last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .exceptions import (
    AssumptionAViolation,
    AssumptionBViolation,
    MultipleRoots,
    NonConvexQuad,
)
from .geometry import DEFAULT_SNAP_TOL, LevelSetInterface, bisect_parameters, count_sign_changes

PLAIN, CUT_TRIANGLE, SPLIT_TRIANGLE = 0, 1, 2
TIE_TOL = 1e-12
_CHUNK = 8192


# ---------------------------------------------------------------------------
# background mesh


@dataclass(frozen=True)
class BackgroundMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    tri_edges: np.ndarray
    tri_edge_signs: np.ndarray
    boundary_edges: np.ndarray
    n: int
    box: Tuple[float, float, float, float]

    @property
    def h(self) -> float:
        """Nominal mesh size ``1/N`` (the convention of the convergence tables)."""
        return 1.0 / self.n

    @property
    def spacing(self) -> float:
        return (self.box[1] - self.box[0]) / self.n

    def areas(self) -> np.ndarray:
        return triangle_areas(self.vertices[self.triangles])

    def diameters(self) -> np.ndarray:
        X = self.vertices[self.triangles]
        return np.max(np.linalg.norm(X - np.roll(X, -1, axis=1), axis=-1), axis=1)

    def angle_range(self) -> Tuple[float, float]:
        ang = triangle_angles(self.vertices[self.triangles])
        return float(ang.min()), float(ang.max())

    def on_boundary(self, points, tol: float = 1e-12) -> np.ndarray:
        x0, x1, y0, y1 = self.box
        p = np.asarray(points)
        scale = tol * max(x1 - x0, y1 - y0)
        return ((np.abs(p[..., 0] - x0) <= scale) | (np.abs(p[..., 0] - x1) <= scale)
                | (np.abs(p[..., 1] - y0) <= scale) | (np.abs(p[..., 1] - y1) <= scale))


def triangle_areas(X: np.ndarray) -> np.ndarray:
    """Signed areas of triangles ``X`` with shape (..., 3, 2)."""
    a = X[..., 1, :] - X[..., 0, :]
    b = X[..., 2, :] - X[..., 0, :]
    return 0.5 * (a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])


def polygon_angles(X: np.ndarray) -> np.ndarray:
    """Interior angles of convex polygons ``X`` with shape (..., m, 2)."""
    prev = np.roll(X, 1, axis=-2) - X
    nxt = np.roll(X, -1, axis=-2) - X
    cross = prev[..., 0] * nxt[..., 1] - prev[..., 1] * nxt[..., 0]
    dot = np.sum(prev * nxt, axis=-1)
    return np.arctan2(np.abs(cross), dot)


triangle_angles = polygon_angles


def _unique_edges(pairs: np.ndarray):
    key = np.sort(pairs, axis=1)
    edges, inverse = np.unique(key, axis=0, return_inverse=True)
    return edges, inverse.reshape(-1)


def build_background_mesh(n: int, box=(-1.0, 1.0, -1.0, 1.0)) -> BackgroundMesh:
    """Structured ``n x n`` grid, each square split along its lower-left to
    upper-right diagonal."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    x0, x1, y0, y1 = map(float, box)
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    v00 = (j * (n + 1) + i).ravel()
    v10 = v00 + 1
    v01 = v00 + n + 1
    v11 = v01 + 1
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    pairs = np.stack([triangles, np.roll(triangles, -1, axis=1)], axis=-1).reshape(-1, 2)
    edges, inverse = _unique_edges(pairs)
    tri_edges = inverse.reshape(-1, 3)
    tri_edge_signs = np.where(pairs[:, 0] < pairs[:, 1], 1, -1).reshape(-1, 3)
    counts = np.bincount(inverse, minlength=len(edges))
    boundary_edges = counts == 1
    return BackgroundMesh(vertices, triangles, edges, tri_edges, tri_edge_signs,
                          boundary_edges, n, (x0, x1, y0, y1))


# ---------------------------------------------------------------------------
# interface detection


@dataclass
class InterfaceReport:
    """Outcome of locating the interface on a background mesh."""

    vertex_sign: np.ndarray
    edge_s: np.ndarray  # root parameter on cut background edges, NaN elsewhere
    tri_tag: np.ndarray
    tri_side: np.ndarray
    n_snapped: int
    multiple_root_edges: np.ndarray
    hidden_crossing_triangles: np.ndarray
    boundary_interface_triangles: np.ndarray
    degenerate_triangles: np.ndarray

    @property
    def assumption_a(self) -> bool:
        return (len(self.multiple_root_edges) == 0 and len(self.hidden_crossing_triangles) == 0
                and len(self.degenerate_triangles) == 0)

    @property
    def assumption_b(self) -> bool:
        return len(self.boundary_interface_triangles) == 0

    @property
    def interface_triangles(self) -> np.ndarray:
        return np.flatnonzero(self.tri_tag != PLAIN)

    def raise_for_violations(self) -> None:
        if len(self.multiple_root_edges):
            raise MultipleRoots(
                f"{len(self.multiple_root_edges)} edge(s) crossed more than once by the interface")
        if len(self.hidden_crossing_triangles) or len(self.degenerate_triangles):
            n = len(self.hidden_crossing_triangles) + len(self.degenerate_triangles)
            raise AssumptionAViolation(f"{n} triangle(s) not cut at two points on two edges")
        if len(self.boundary_interface_triangles):
            raise AssumptionBViolation(
                f"{len(self.boundary_interface_triangles)} interface triangle(s) touch the boundary")


def _chunked(fn, n, *arrays):
    out = []
    for start in range(0, n, _CHUNK):
        out.append(fn(*(a[start:start + _CHUNK] for a in arrays)))
    return np.concatenate(out) if out else np.zeros(0)


def _lattice(order: int) -> np.ndarray:
    """Barycentric lattice points strictly inside the reference triangle."""
    pts = [(i / order, j / order, (order - i - j) / order)
           for i in range(1, order) for j in range(1, order - i)]
    return np.array(pts)


def _contains(X: np.ndarray, p: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Whether point ``p`` lies in each (closed) counterclockwise triangle of ``X``."""
    d = X - p
    cross = d[:, :, 0] * np.roll(d, -1, axis=1)[:, :, 1] - d[:, :, 1] * np.roll(d, -1, axis=1)[:, :, 0]
    return np.all(cross >= -tol * triangle_areas(X)[:, None], axis=1)


def detect_interface_elements(bm: BackgroundMesh, ls: LevelSetInterface,
                              snap_tol: float = DEFAULT_SNAP_TOL,
                              raise_on_violation: bool = True) -> InterfaceReport:
    V, E, T = bm.vertices, bm.edges, bm.triangles
    sign = np.sign(ls(V)).astype(np.int64)

    n_changes = _chunked(lambda a, b: count_sign_changes(ls, a, b), len(E), V[E[:, 0]], V[E[:, 1]])
    multiple = np.flatnonzero(n_changes > 1)

    # snap cuts that land within snap_tol of an endpoint onto that endpoint
    crossing = np.flatnonzero(sign[E[:, 0]] * sign[E[:, 1]] < 0)
    s = bisect_parameters(ls, V[E[crossing, 0]], V[E[crossing, 1]]) if len(crossing) else np.zeros(0)
    near0 = s < snap_tol
    near1 = s > 1.0 - snap_tol
    sign[E[crossing[near0], 0]] = 0
    sign[E[crossing[near1], 1]] = 0
    n_snapped = int(np.count_nonzero(near0) + np.count_nonzero(near1))

    edge_s = np.full(len(E), np.nan)
    still = sign[E[crossing, 0]] * sign[E[crossing, 1]] < 0
    edge_s[crossing[still]] = s[still]

    St = sign[T]
    has_plus = np.any(St > 0, axis=1)
    has_minus = np.any(St < 0, axis=1)
    n_zero = np.count_nonzero(St == 0, axis=1)
    tri_tag = np.full(len(T), PLAIN)
    cut = has_plus & has_minus
    tri_tag[cut & (n_zero == 0)] = CUT_TRIANGLE
    tri_tag[cut & (n_zero == 1)] = SPLIT_TRIANGLE
    tri_side = np.where(has_plus, 1, np.where(has_minus, -1, 0))
    tri_side[cut] = 0
    degenerate = np.flatnonzero(~has_plus & ~has_minus)

    # an interface that enters and leaves a triangle through vertices of equal
    # sign (or sits entirely inside it) is invisible to the vertex signs; with
    # two vertices on the interface the edge between them is the chord
    plain = np.flatnonzero(~cut & (n_zero < 2))
    lattice = _lattice(6)

    def hidden(tri_idx, side):
        pts = np.einsum("qk,tkd->tqd", lattice, V[T[tri_idx]])
        vals = ls(pts)
        return np.any(vals * side[:, None] < 0.0, axis=1)

    if len(plain):
        mask = _chunked(hidden, len(plain), plain, tri_side[plain]).astype(bool)
        probes = np.asarray(ls.probe_points(), dtype=float).reshape(-1, 2)
        for p in probes:
            val = float(ls(p))
            if val == 0.0:
                continue
            inside = _contains(V[T[plain]], p)
            mask |= inside & (val * tri_side[plain] < 0.0)
        hidden_tris = plain[mask]
    else:
        hidden_tris = np.zeros(0, dtype=np.int64)

    iface = np.flatnonzero(cut)
    on_bd = bm.on_boundary(V[T[iface]]).any(axis=1)
    boundary_tris = iface[on_bd]

    report = InterfaceReport(sign, edge_s, tri_tag, tri_side, n_snapped, multiple,
                             hidden_tris, boundary_tris, degenerate)
    if raise_on_violation:
        report.raise_for_violations()
    return report


# ---------------------------------------------------------------------------
# quadrilateral split


def _diagonal_choice(Q: np.ndarray, ids: Optional[np.ndarray] = None) -> np.ndarray:
    """0 for the diagonal q0-q2, 1 for q1-q3; batched over (n, 4, 2)."""
    Q = np.asarray(Q, dtype=float)
    if ids is None:
        ids = np.broadcast_to(np.arange(4), Q.shape[:-1])
    ang = polygon_angles(Q)
    prev = np.roll(Q, 1, axis=-2) - Q
    nxt = np.roll(Q, -1, axis=-2) - Q
    turn = nxt[..., 0] * prev[..., 1] - nxt[..., 1] * prev[..., 0]
    if np.any(turn <= 0.0):
        raise NonConvexQuad("quadrilateral is not strictly convex and counterclockwise")
    opposite02 = ang[:, 1] + ang[:, 3]
    choice = np.where(opposite02 <= np.pi, 0, 1)
    tie = np.abs(opposite02 - np.pi) < TIE_TOL
    if np.any(tie):
        d02 = np.linalg.norm(Q[:, 2] - Q[:, 0], axis=-1)
        d13 = np.linalg.norm(Q[:, 3] - Q[:, 1], axis=-1)
        shorter = np.where(d02 < d13, 0, 1)
        same_len = np.abs(d02 - d13) <= TIE_TOL * np.maximum(d02, d13)
        low02 = np.minimum(ids[:, 0], ids[:, 2])
        low13 = np.minimum(ids[:, 1], ids[:, 3])
        by_index = np.where(low02 <= low13, 0, 1)
        choice = np.where(tie, np.where(same_len, by_index, shorter), choice)
    return choice


def split_quad(quad, vertex_ids=None) -> Tuple[int, np.ndarray]:
    """Pick the Delaunay diagonal of a convex counterclockwise quadrilateral.

    Returns the diagonal (0 for q0-q2, 1 for q1-q3) and the two sub-triangles
    as local vertex indices.
    """
    Q = np.asarray(quad, dtype=float)[None]
    ids = None if vertex_ids is None else np.asarray(vertex_ids)[None]
    d = int(_diagonal_choice(Q, ids)[0])
    return d, quad_subtriangles(d)


def quad_subtriangles(diag: int) -> np.ndarray:
    r = np.roll(np.arange(4), -diag)
    return np.array([[r[0], r[1], r[2]], [r[0], r[2], r[3]]])


# ---------------------------------------------------------------------------
# cut mesh


@dataclass
class CutMesh:
    """Interface-fitted mesh of triangles and split quadrilaterals.

    Local edge ``k`` of a triangle (quad) runs from local vertex ``k`` to
    ``k + 1``; the matching entry of ``*_signs`` is +1 when that traversal
    agrees with the global edge orientation.
    """

    background: BackgroundMesh
    interface: LevelSetInterface
    vertices: np.ndarray
    edges: np.ndarray
    n_dofs: int
    triangles: np.ndarray
    tri_edges: np.ndarray
    tri_signs: np.ndarray
    tri_kind: np.ndarray
    tri_side: np.ndarray
    tri_parent: np.ndarray
    tri_h: np.ndarray
    quads: np.ndarray
    quad_edges: np.ndarray
    quad_signs: np.ndarray
    quad_diag: np.ndarray
    quad_diag_edge: np.ndarray
    quad_diag_sign: np.ndarray
    quad_side: np.ndarray
    quad_parent: np.ndarray
    quad_h: np.ndarray
    boundary: np.ndarray
    gamma_edges: np.ndarray
    report: InterfaceReport
    orientation: str = "lex"

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_diagonals(self) -> int:
        return len(self.quads)

    @property
    def h(self) -> float:
        return self.background.h

    def tri_coords(self) -> np.ndarray:
        return self.vertices[self.triangles]

    def quad_coords(self) -> np.ndarray:
        return self.vertices[self.quads]

    def quad_split_triangles(self) -> Tuple[np.ndarray, np.ndarray]:
        """Vertex indices of the two Delaunay sub-triangles of each quad."""
        r = (np.arange(4)[None, :] + self.quad_diag[:, None]) % 4
        q = np.take_along_axis(self.quads, r, axis=1)
        return q[:, [0, 1, 2]], q[:, [0, 2, 3]]

    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.linalg.norm(d, axis=1)

    def edge_tangents(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return d / np.linalg.norm(d, axis=1)[:, None]

    def element_areas(self) -> Tuple[np.ndarray, np.ndarray]:
        at = triangle_areas(self.tri_coords())
        Q = self.quad_coords()
        aq = triangle_areas(Q[:, [0, 1, 2]]) + triangle_areas(Q[:, [0, 2, 3]])
        return at, aq

    def gamma_polyline(self) -> np.ndarray:
        """Edges (vertex pairs) forming the discrete interface."""
        return self.edges[self.gamma_edges]

    def dof_edge_elements(self):
        """For each DoF edge, the adjacent (kind, index, area, side) records.

        kind is 't' or 'q'.  Used by the interface-aware interpolant.
        """
        adj: List[list] = [[] for _ in range(self.n_dofs)]
        at, aq = self.element_areas()
        for t in range(len(self.triangles)):
            for e in self.tri_edges[t]:
                adj[e].append(("t", t, at[t], self.tri_side[t]))
        for q in range(len(self.quads)):
            for e in self.quad_edges[q]:
                adj[e].append(("q", q, aq[q], self.quad_side[q]))
        return adj


def _orient(V: np.ndarray, pairs: np.ndarray, orientation: str) -> np.ndarray:
    a, b = pairs[:, 0], pairs[:, 1]
    xa, ya, xb, yb = V[a, 0], V[a, 1], V[b, 0], V[b, 1]
    a_first = (xa < xb) | ((xa == xb) & ((ya < yb) | ((ya == yb) & (a < b))))
    if orientation == "reversed":
        a_first = ~a_first
    elif orientation != "lex":
        raise ValueError(f"unknown orientation {orientation!r}")
    return np.where(a_first[:, None], pairs, pairs[:, ::-1])


def _roll_rows(A: np.ndarray, shift: np.ndarray) -> np.ndarray:
    m = A.shape[1]
    idx = (np.arange(m)[None, :] + shift[:, None]) % m
    return np.take_along_axis(A, idx, axis=1)


def cut_mesh(bm: BackgroundMesh, ls: LevelSetInterface, snap_tol: float = DEFAULT_SNAP_TOL,
             orientation: str = "lex", strict: bool = True) -> CutMesh:
    """Cut every interface triangle of ``bm`` along the chord of the interface.

    With ``strict=False`` an interface touching the outer boundary is
    accepted (the cut itself is still well defined); edge multi-crossings
    always raise.
    """
    rep = detect_interface_elements(bm, ls, snap_tol, raise_on_violation=strict)
    if not strict and not rep.assumption_a:
        rep.raise_for_violations()
    V0, T0 = bm.vertices, bm.triangles
    sign = rep.vertex_sign

    cut_edges = np.flatnonzero(~np.isnan(rep.edge_s))
    s = rep.edge_s[cut_edges]
    p0 = V0[bm.edges[cut_edges, 0]]
    p1 = V0[bm.edges[cut_edges, 1]]
    cut_points = p0 + s[:, None] * (p1 - p0)
    vertices = np.vstack([V0, cut_points])
    cut_vertex = np.full(len(bm.edges), -1, dtype=np.int64)
    cut_vertex[cut_edges] = len(V0) + np.arange(len(cut_edges))

    diam = bm.diameters()

    tri_list, kind_list, side_list, parent_list = [], [], [], []

    plain = np.flatnonzero(rep.tri_tag == PLAIN)
    tri_list.append(T0[plain])
    kind_list.append(np.full(len(plain), PLAIN))
    side_list.append(rep.tri_side[plain])
    parent_list.append(plain)

    # triangles cut through two edges: apex is the vertex with the lone sign
    ct = np.flatnonzero(rep.tri_tag == CUT_TRIANGLE)
    St = sign[T0[ct]]
    apex = np.where(St[:, 0] == St[:, 1], 2, np.where(St[:, 1] == St[:, 2], 0, 1))
    abc = _roll_rows(T0[ct], apex)
    loc_e = _roll_rows(bm.tri_edges[ct], apex)
    D = cut_vertex[loc_e[:, 0]]
    E = cut_vertex[loc_e[:, 2]]
    apex_sign = sign[abc[:, 0]]
    tri_list.append(np.column_stack([abc[:, 0], D, E]))
    kind_list.append(np.full(len(ct), CUT_TRIANGLE))
    side_list.append(apex_sign)
    parent_list.append(ct)
    quads = np.column_stack([E, D, abc[:, 1], abc[:, 2]])
    quad_side = -apex_sign
    quad_parent = ct

    # triangles with one vertex on the interface split into two triangles
    st = np.flatnonzero(rep.tri_tag == SPLIT_TRIANGLE)
    zero = np.argmax(sign[T0[st]] == 0, axis=1)
    zbc = _roll_rows(T0[st], zero)
    C = cut_vertex[_roll_rows(bm.tri_edges[st], zero)[:, 1]]
    tri_list += [np.column_stack([zbc[:, 0], zbc[:, 1], C]), np.column_stack([zbc[:, 0], C, zbc[:, 2]])]
    kind_list += [np.full(len(st), SPLIT_TRIANGLE)] * 2
    side_list += [sign[zbc[:, 1]], sign[zbc[:, 2]]]
    parent_list += [st, st]

    triangles = np.vstack(tri_list).astype(np.int64)
    tri_kind = np.concatenate(kind_list)
    tri_side = np.concatenate(side_list).astype(np.int64)
    tri_parent = np.concatenate(parent_list)

    quad_diag = _diagonal_choice(vertices[quads], quads) if len(quads) else np.zeros(0, dtype=np.int64)

    # global edges: DoF edges first, then quad diagonals
    tri_pairs = np.stack([triangles, np.roll(triangles, -1, axis=1)], axis=-1).reshape(-1, 2)
    quad_pairs = np.stack([quads, np.roll(quads, -1, axis=1)], axis=-1).reshape(-1, 2)
    all_pairs = np.vstack([tri_pairs, quad_pairs])
    dof_edges, inverse = _unique_edges(all_pairs)
    n_dofs = len(dof_edges)
    rq = _roll_rows(quads, quad_diag) if len(quads) else quads.reshape(0, 4)
    diag_pairs = rq[:, [0, 2]]
    edges = _orient(vertices, np.vstack([dof_edges, diag_pairs]).astype(np.int64), orientation)

    nt = len(triangles)
    tri_edges = inverse[: 3 * nt].reshape(-1, 3)
    quad_edges = inverse[3 * nt:].reshape(-1, 4)
    tri_signs = np.where(edges[tri_edges, 0] == triangles, 1, -1)
    quad_signs = np.where(edges[quad_edges, 0] == quads, 1, -1) if len(quads) else quad_edges.copy()
    quad_diag_edge = n_dofs + np.arange(len(quads))
    quad_diag_sign = np.where(edges[quad_diag_edge, 0] == rq[:, 0], 1, -1)

    # boundary DoF edges: both endpoints on the same side of the box
    x0, x1, y0, y1 = bm.box
    P, Qe = vertices[edges[:n_dofs, 0]], vertices[edges[:n_dofs, 1]]
    boundary = np.zeros(n_dofs, dtype=bool)
    for axis, val in ((0, x0), (0, x1), (1, y0), (1, y1)):
        boundary |= (P[:, axis] == val) & (Qe[:, axis] == val)

    # discrete interface: edges whose neighbours carry different side tags
    elem_side = np.concatenate([np.repeat(tri_side, 3), np.repeat(quad_side, 4)])
    lo = np.full(n_dofs, 2)
    hi = np.full(n_dofs, -2)
    np.minimum.at(lo, inverse, elem_side)
    np.maximum.at(hi, inverse, elem_side)
    gamma_edges = np.zeros(len(edges), dtype=bool)
    gamma_edges[:n_dofs] = lo != hi

    return CutMesh(
        background=bm, interface=ls, vertices=vertices, edges=edges, n_dofs=n_dofs,
        triangles=triangles, tri_edges=tri_edges, tri_signs=tri_signs, tri_kind=tri_kind,
        tri_side=tri_side, tri_parent=tri_parent, tri_h=diam[tri_parent],
        quads=quads.astype(np.int64), quad_edges=quad_edges, quad_signs=quad_signs,
        quad_diag=quad_diag.astype(np.int64), quad_diag_edge=quad_diag_edge,
        quad_diag_sign=quad_diag_sign, quad_side=quad_side.astype(np.int64),
        quad_parent=quad_parent, quad_h=diam[quad_parent], boundary=boundary,
        gamma_edges=gamma_edges, report=rep, orientation=orientation,
    )


# ---------------------------------------------------------------------------
# certification


@dataclass
class GeometryCertificate:
    max_angle: float
    background_min_angle: float
    background_max_angle: float
    assumption_a: bool
    assumption_b: bool
    n_snapped: int
    bound: float = field(init=False)

    def __post_init__(self):
        self.bound = max(np.pi - self.background_min_angle, self.background_max_angle)

    @property
    def max_angle_ok(self) -> bool:
        return self.max_angle <= self.bound + 1e-12

    @property
    def passed(self) -> bool:
        return self.max_angle_ok and self.assumption_a and self.assumption_b

    def summary(self) -> str:
        return (f"max angle {np.degrees(self.max_angle):.6f} deg "
                f"(bound {np.degrees(self.bound):.6f} deg), "
                f"assumption A {'ok' if self.assumption_a else 'VIOLATED'}, "
                f"assumption B {'ok' if self.assumption_b else 'VIOLATED'}, "
                f"snapped cuts {self.n_snapped}: {'PASS' if self.passed else 'FAIL'}")


def all_triangles(cm: CutMesh) -> np.ndarray:
    """Coordinates of every triangle of the auxiliary (fully split) mesh."""
    T1, T2 = cm.quad_split_triangles()
    return cm.vertices[np.vstack([cm.triangles, T1, T2])]


def verify_max_angle(cm: CutMesh) -> GeometryCertificate:
    ang = triangle_angles(all_triangles(cm))
    tmin, tmax = cm.background.angle_range()
    return GeometryCertificate(float(ang.max()), tmin, tmax, cm.report.assumption_a,
                               cm.report.assumption_b, cm.report.n_snapped)


def certify(bm: BackgroundMesh, ls: LevelSetInterface,
            snap_tol: float = DEFAULT_SNAP_TOL) -> GeometryCertificate:
    """Certificate that never raises: violations are recorded as flags.

    The angle is measured whenever the cut is well defined, i.e. unless
    assumption (A) fails; it is NaN otherwise.
    """
    rep = detect_interface_elements(bm, ls, snap_tol, raise_on_violation=False)
    tmin, tmax = bm.angle_range()
    if not rep.assumption_a:
        return GeometryCertificate(float("nan"), tmin, tmax, rep.assumption_a,
                                   rep.assumption_b, rep.n_snapped)
    return verify_max_angle(cut_mesh(bm, ls, snap_tol, strict=False))


def interface_gap(cm: CutMesh, project) -> float:
    """Largest distance from the discrete interface to the true one.

    Sampled at 9 points per chord; ``project`` maps points onto the interface.
    """
    seg = cm.gamma_polyline()
    if len(seg) == 0:
        return 0.0
    t = np.linspace(0.0, 1.0, 9)
    A, B = cm.vertices[seg[:, 0]], cm.vertices[seg[:, 1]]
    pts = A[:, None, :] + t[None, :, None] * (B - A)[:, None, :]
    return float(np.max(np.linalg.norm(pts - project(pts), axis=-1)))


# ---------------------------------------------------------------------------
# text export


def format_mesh(cm: CutMesh) -> str:
    """Plain-text dump: vertices, edges with flags, elements with kind tags."""
    out = [f"# cutvem mesh N={cm.background.n} orientation={cm.orientation}",
           f"vertices {len(cm.vertices)}"]
    out += [f"{x:.17g} {y:.17g}" for x, y in cm.vertices]
    out.append(f"edges {cm.n_edges} dofs {cm.n_dofs}")
    for k, (a, b) in enumerate(cm.edges):
        if k >= cm.n_dofs:
            flag = "d"
        elif cm.boundary[k]:
            flag = "b"
        elif cm.gamma_edges[k]:
            flag = "g"
        else:
            flag = "-"
        out.append(f"{a} {b} {flag}")
    out.append(f"elements {len(cm.triangles) + len(cm.quads)}")
    tags = {PLAIN: "T", CUT_TRIANGLE: "Kt", SPLIT_TRIANGLE: "Ks"}
    for t, (a, b, c) in enumerate(cm.triangles):
        out.append(f"{tags[int(cm.tri_kind[t])]} {a} {b} {c} {cm.tri_side[t]:+d} {cm.tri_parent[t]}")
    for q, (a, b, c, d) in enumerate(cm.quads):
        out.append(f"Kq {a} {b} {c} {d} {cm.quad_diag[q]} {cm.quad_side[q]:+d} {cm.quad_parent[q]}")
    return "\n".join(out) + "\n"


def write_mesh(cm: CutMesh, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_mesh(cm))

"""Manufactured interface solution, error norms and the convergence study."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .assembly import (
    CoefficientField,
    ReducedSystem,
    apply_dirichlet,
    assemble_system,
    boundary_values,
    quad_geometry_of,
)
from .element import tri_curls, tri_gradients, tri_whitney
from .geometry import Circle, LevelSetInterface, bisect_parameters, make_interface
from .mesh import CutMesh, build_background_mesh, cut_mesh, triangle_areas, verify_max_angle
from .quadrature import map_points, triangle_rule
from .solver import DEFAULT_TOL, cg_solve

DOMAIN = (-1.0, 1.0, -1.0, 1.0)


# ---------------------------------------------------------------------------
# problems


class PiecewiseProblem:
    """Exact solution given by two globally defined pieces.

    Subclasses provide ``u_minus``/``u_plus``, ``curl_minus``/``curl_plus``
    and ``f_minus``/``f_plus`` (vectorized over trailing-dim-2 points) plus
    ``interface`` and ``coefficients``.  The dispatching methods pick the
    piece from the sign of the true level set.
    """

    interface: LevelSetInterface
    coefficients: CoefficientField

    def _pick(self, lo, hi, p, vector=True):
        p = np.asarray(p, dtype=float)
        inside = self.interface(p) <= 0.0
        a, b = lo(p), hi(p)
        return np.where(inside[..., None] if vector else inside, a, b)

    def u(self, p):
        return self._pick(self.u_minus, self.u_plus, p)

    def curl(self, p):
        return self._pick(self.curl_minus, self.curl_plus, p, vector=False)

    def f(self, p):
        return self._pick(self.f_minus, self.f_plus, p)


@dataclass(frozen=True)
class ManufacturedCase(PiecewiseProblem):
    """Circular interface solution with ``mu = 1/alpha`` on each side.

    With this choice ``alpha curl u`` is continuous across the circle and the
    tangential trace vanishes there on both sides.
    """

    r1: float = math.pi / 5
    r2: float = 1.0
    k2: float = 20.0
    alpha_minus: float = 1.0
    alpha_plus: float = 10.0
    beta_minus: float = 1.0
    beta_plus: float = 10.0
    center: tuple = (0.0, 0.0)

    @property
    def k1(self) -> float:
        return self.k2 * (self.r2**2 - self.r1**2)

    @property
    def mu_minus(self) -> float:
        return 1.0 / self.alpha_minus

    @property
    def mu_plus(self) -> float:
        return 1.0 / self.alpha_plus

    @property
    def interface(self) -> Circle:
        return Circle(self.r1, self.center)

    @property
    def coefficients(self) -> CoefficientField:
        return CoefficientField(self.alpha_minus, self.alpha_plus, self.beta_minus, self.beta_plus)

    def _xy(self, p):
        p = np.asarray(p, dtype=float)
        return p[..., 0] - self.center[0], p[..., 1] - self.center[1]

    def u_minus(self, p):
        x, y = self._xy(p)
        g = -self.mu_minus * self.k1 * (self.r1**2 - x * x - y * y)
        return np.stack([g * y, g * x], axis=-1)

    def u_plus(self, p):
        x, y = self._xy(p)
        s = x * x + y * y
        g = -self.mu_plus * self.k2 * (self.r2**2 - s) * (self.r1**2 - s)
        return np.stack([g * y, g * x], axis=-1)

    def curl_minus(self, p):
        x, y = self._xy(p)
        return 2.0 * self.mu_minus * self.k1 * (x * x - y * y)

    def curl_plus(self, p):
        x, y = self._xy(p)
        c = self.r1**2 + self.r2**2
        return 2.0 * self.mu_plus * self.k2 * (x * x - y * y) * (c - 2.0 * (x * x + y * y))

    def f_minus(self, p):
        x, y = self._xy(p)
        rot = -4.0 * self.alpha_minus * self.mu_minus * self.k1 * np.stack([y, x], axis=-1)
        return rot + self.beta_minus * self.u_minus(p)

    def f_plus(self, p):
        x, y = self._xy(p)
        c = self.r1**2 + self.r2**2
        rot = 4.0 * self.alpha_plus * self.mu_plus * self.k2 * np.stack(
            [y * (4.0 * y * y - c), x * (4.0 * x * x - c)], axis=-1)
        return rot + self.beta_plus * self.u_plus(p)


@dataclass(frozen=True)
class ConstantField(PiecewiseProblem):
    """``u = value`` everywhere; with ``f = beta u`` it solves the PDE exactly."""

    value: tuple = (1.0, -0.5)
    interface: LevelSetInterface = field(default_factory=lambda: Circle(math.pi / 5))
    coefficients: CoefficientField = CoefficientField()

    def u_minus(self, p):
        return np.broadcast_to(np.asarray(self.value, float), np.shape(p)).copy()

    u_plus = u_minus

    def curl_minus(self, p):
        return np.zeros(np.shape(p)[:-1])

    curl_plus = curl_minus

    def f_minus(self, p):
        return self.coefficients.beta_minus * self.u_minus(p)

    def f_plus(self, p):
        return self.coefficients.beta_plus * self.u_plus(p)


def exact_solution(case: PiecewiseProblem, p):
    return case.u(p)


def exact_curl(case: PiecewiseProblem, p):
    return case.curl(p)


def source_f(case: PiecewiseProblem, p):
    return case.f(p)


# ---------------------------------------------------------------------------
# errors


ERROR_REFINE_LEVELS = 3
_LATTICE_ORDER = 4


def _lattice(order: int) -> np.ndarray:
    pts = [(i, j, order - i - j) for i in range(order + 1) for j in range(order + 1 - i)]
    return np.array(pts, dtype=float) / order


def _red_refine(X: np.ndarray, parent: np.ndarray):
    a, b, c = X[:, 0], X[:, 1], X[:, 2]
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    kids = [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    Y = np.stack([np.stack(k, axis=1) for k in kids], axis=1).reshape(-1, 3, 2)
    return Y, np.repeat(parent, 4)


def _chord_cut(X: np.ndarray, parent: np.ndarray, ls: LevelSetInterface):
    """Split triangles whose vertices straddle the interface along the chord."""
    side = ls(X.reshape(-1, 2)).reshape(-1, 3) > 0.0
    cut = side.any(axis=1) & ~side.all(axis=1)
    if not cut.any():
        return X, parent
    Xc, sc = X[cut], side[cut]
    # index of the vertex alone on its side
    lone = np.where(sc[:, 1] == sc[:, 2], 0, np.where(sc[:, 0] == sc[:, 2], 1, 2))
    order = (lone[:, None] + np.arange(3)[None, :]) % 3
    P, Q, R = (np.take_along_axis(Xc, order[:, k, None, None], axis=1)[:, 0] for k in range(3))
    D = P + bisect_parameters(ls, P, Q)[:, None] * (Q - P)
    E = P + bisect_parameters(ls, P, R)[:, None] * (R - P)
    pieces = np.concatenate([np.stack(t, axis=1) for t in ((P, D, E), (D, Q, R), (D, R, E))])
    return (np.concatenate([X[~cut], pieces]),
            np.concatenate([parent[~cut], np.tile(parent[cut], 3)]))


def _conforming_pieces(X: np.ndarray, ls: LevelSetInterface, levels: int):
    """Sub-triangles of ``X`` on which the piecewise exact fields are smooth.

    Triangles met by the true interface are refined ``levels`` times and the
    crossed children are split along the chord of the interface, so only the
    thin region between arc and chord remains mismatched.
    """
    parent = np.arange(len(X))
    lat = _lattice(_LATTICE_ORDER)
    phi = ls(map_points(X, lat).reshape(-1, 2)).reshape(len(X), -1)
    crossed = (phi.min(axis=1) < 0.0) & (phi.max(axis=1) > 0.0)
    Y, py = X[crossed], parent[crossed]
    for _ in range(levels):
        Y, py = _red_refine(Y, py)
    Y, py = _chord_cut(Y, py, ls)
    return np.concatenate([X[~crossed], Y]), np.concatenate([parent[~crossed], py])


def whitney_affine(X: np.ndarray, loc: np.ndarray):
    """Write the Whitney field with local DoFs ``loc`` as ``a + s (-y, x)``.

    Returns ``(a, s, curl)`` with shapes (n, 2), (n,), (n,).
    """
    _, G = tri_gradients(X)
    ch = np.einsum("ni,ni->n", tri_curls(G), loc)
    centre = np.full((1, 3), 1.0 / 3.0)
    uc = np.einsum("nqid,ni->nqd", tri_whitney(G, centre), loc)[:, 0]
    xc = X.mean(axis=1)
    s = 0.5 * ch
    a = uc - s[:, None] * np.column_stack([-xc[:, 1], xc[:, 0]])
    return a, s, ch


def _discrete_fields(cm: CutMesh, dofs: np.ndarray):
    """Triangles (m, 3, 2) with their owning element and the affine data of u_h.

    On triangles this is the Whitney field itself, on quadrilaterals the
    projection ``Pi u_h`` (so ``s = 0``) with the DoF-computable curl.
    """
    Xt = cm.tri_coords()
    a, s, ch = whitney_affine(Xt, dofs[cm.tri_edges] * cm.tri_signs)
    X, A, S, C = [Xt], [a], [s], [ch]
    owner = [np.arange(len(Xt))]
    if len(cm.quads):
        g = quad_geometry_of(cm)
        locq = dofs[cm.quad_edges] * cm.quad_signs
        nq = len(cm.quads)
        X.append(g.sub_coords.reshape(-1, 3, 2))
        owner.append(len(Xt) + np.repeat(np.arange(nq), 2))
        A.append(np.einsum("ndi,ni->nd", g.projection, locq))
        S.append(np.zeros(nq))
        C.append(np.einsum("ni,ni->n", g.curl, locq))
    return (np.concatenate(X), np.concatenate(owner), np.concatenate(A),
            np.concatenate(S), np.concatenate(C))


def piecewise_errors(X, owner, A, S, C, case: PiecewiseProblem, quad_degree: int = 6,
                     refine_levels: int = ERROR_REFINE_LEVELS):
    """Squared L2 errors per element of a field given as ``a + s (-y, x)`` with curl ``c``.

    ``X`` lists triangles, ``owner`` maps each one to its element, whose data
    are ``A[k], S[k], C[k]``.  Returns two arrays indexed by element.
    """
    Y, piece = _conforming_pieces(X, case.interface, refine_levels)
    k = owner[piece]
    bary, w = triangle_rule(quad_degree)
    pts = map_points(Y, bary)
    area = np.abs(triangle_areas(Y))
    rot = np.stack([-pts[..., 1], pts[..., 0]], axis=-1)
    uh = A[k][:, None, :] + S[k][:, None, None] * rot
    d0 = np.einsum("n,q,nq->n", area, w, np.sum((case.u(pts) - uh) ** 2, axis=-1))
    d1 = np.einsum("n,q,nq->n", area, w, (case.curl(pts) - C[k][:, None]) ** 2)
    m = len(A)
    return np.bincount(k, d0, minlength=m), np.bincount(k, d1, minlength=m)


def compute_errors(cm: CutMesh, dofs, case: PiecewiseProblem, quad_degree: int = 6,
                   refine_levels: int = ERROR_REFINE_LEVELS):
    """``e0 = ||u - Pi_h u_h||`` and ``e1 = ||curl u - curl_h u_h||`` (L2 over the domain).

    The exact fields are evaluated on the side of the true interface at each
    quadrature point; elements crossed by the true interface are integrated on
    interface-conforming sub-triangles so the result does not hinge on the rule.
    """
    dofs = np.asarray(dofs, dtype=float)
    d0, d1 = piecewise_errors(*_discrete_fields(cm, dofs), case, quad_degree, refine_levels)
    return float(np.sqrt(d0.sum())), float(np.sqrt(d1.sum()))


# ---------------------------------------------------------------------------
# single solve


@dataclass
class SolveResult:
    mesh: CutMesh
    dofs: np.ndarray
    e0: float
    e1: float
    iterations: int
    residual: float
    seconds: float
    n_unknowns: int
    system: Optional[ReducedSystem] = None


def solve_vem(case: PiecewiseProblem, n: int, gamma_k: float = 1.0, cg_tol: float = DEFAULT_TOL,
              quad_degree: int = 6, mesh: Optional[CutMesh] = None, max_iter: Optional[int] = None,
              keep_system: bool = False) -> SolveResult:
    """Build, cut, assemble, constrain, solve and measure one refinement level."""
    start = time.perf_counter()
    cm = mesh if mesh is not None else cut_mesh(build_background_mesh(n, DOMAIN), case.interface)
    system = assemble_system(cm, case.coefficients, case.f, quad_degree, gamma_k)
    reduced = apply_dirichlet(system, boundary_values(cm, case.u))
    x, stats = cg_solve(reduced.matrix, reduced.rhs, tol=cg_tol, max_iter=max_iter)
    dofs = reduced.expand(x)
    e0, e1 = compute_errors(cm, dofs, case, quad_degree)
    return SolveResult(cm, dofs, e0, e1, stats.iterations, stats.residual,
                       time.perf_counter() - start, len(reduced.free), reduced if keep_system else None)


# ---------------------------------------------------------------------------
# convergence study


@dataclass
class StudyConfig:
    n_values: Sequence[int] = (10, 20, 40, 80, 160)
    alpha_minus: float = 1.0
    alpha_plus: float = 10.0
    beta_minus: float = 1.0
    beta_plus: float = 10.0
    gamma_k: float = 1.0
    cg_tol: float = DEFAULT_TOL
    quad_degree: int = 6
    r2: float = 1.0
    k2: float = 20.0
    interface_name: str = "circle"
    interface_cx: float = 0.0
    interface_cy: float = 0.0
    interface_r: float = math.pi / 5
    output_path: Optional[str] = None
    output_format: str = "markdown"

    def case(self) -> ManufacturedCase:
        if self.interface_name != "circle":
            raise ValueError("the manufactured solution is defined for the circle interface only")
        make_interface(self.interface_name, r=self.interface_r, cx=self.interface_cx, cy=self.interface_cy)
        return ManufacturedCase(self.interface_r, self.r2, self.k2, self.alpha_minus, self.alpha_plus,
                                self.beta_minus, self.beta_plus, (self.interface_cx, self.interface_cy))


@dataclass
class ReportRow:
    h: float
    e0: Optional[float]
    rate0: Optional[float]
    e1: Optional[float]
    rate1: Optional[float]
    dofs: Optional[int]
    cg_iters: Optional[int]
    seconds: Optional[float]
    n: Optional[int] = None
    error: Optional[str] = None


@dataclass
class ConvergenceReport:
    rows: List[ReportRow] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def column(self, name) -> list:
        return [getattr(r, name) for r in self.rows]


def _rate(prev: ReportRow, row: ReportRow, key: str) -> Optional[float]:
    a, b = getattr(prev, key), getattr(row, key)
    if prev.n is None or row.n is None or row.n != 2 * prev.n or not a or not b:
        return None
    return math.log2(a / b)


def run_convergence_study(config: StudyConfig, progress=None) -> ConvergenceReport:
    case = config.case()
    report = ConvergenceReport(config=asdict(config))
    for n in config.n_values:
        try:
            res = solve_vem(case, n, config.gamma_k, config.cg_tol, config.quad_degree)
            cert = verify_max_angle(res.mesh)
            row = ReportRow(1.0 / n, res.e0, None, res.e1, None, res.n_unknowns, res.iterations,
                            res.seconds, n, None if cert.passed else "geometry certificate failed")
        except Exception as exc:  # a failed level is recorded, the sweep goes on
            row = ReportRow(1.0 / n, None, None, None, None, None, None, None, n, f"{type(exc).__name__}: {exc}")
        if report.rows:
            row.rate0 = _rate(report.rows[-1], row, "e0")
            row.rate1 = _rate(report.rows[-1], row, "e1")
        report.rows.append(row)
        if progress is not None:
            progress(row)
    return report


# ---------------------------------------------------------------------------
# output

CSV_COLUMNS = ["h", "e0", "rate0", "e1", "rate1", "dofs", "cg_iters", "seconds"]


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def emit_report(report: ConvergenceReport, format: str = "csv") -> str:
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in report.rows:
            writer.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()
    if format == "markdown":
        lines = ["| h | e0 | rate | e1 | rate |", "|---|---|---|---|---|"]
        for r in report.rows:
            h = f"1/{r.n}" if r.n else f"{r.h:.4g}"
            if r.error and r.e0 is None:
                lines.append(f"| {h} | failed: {r.error} | | | |")
                continue
            cells = [f"{r.e0:.4f}", "NA" if r.rate0 is None else f"{r.rate0:.2f}",
                     f"{r.e1:.4f}", "NA" if r.rate1 is None else f"{r.rate1:.2f}"]
            lines.append(f"| {h} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def parse_csv_report(text: str) -> ConvergenceReport:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is not None and list(reader.fieldnames) != CSV_COLUMNS:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    rows = []
    for rec in reader:
        def val(key, cast=float):
            return None if rec[key] == "NA" else cast(rec[key])

        h = float(rec["h"])
        rows.append(ReportRow(h, val("e0"), val("rate0"), val("e1"), val("rate1"), val("dofs", int),
                              val("cg_iters", int), val("seconds"), n=int(round(1.0 / h))))
    return ConvergenceReport(rows)

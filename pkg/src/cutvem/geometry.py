"""Implicit interface description, point classification and edge cutting.

The sign convention is fixed throughout the package: ``phi < 0`` is the
inner region (``minus``), ``phi > 0`` the outer region (``plus``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from .exceptions import MultipleRoots

MINUS = -1
PLUS = 1
ON_INTERFACE = 0

#: number of uniform samples used to detect repeated sign changes on a segment
N_ROOT_SAMPLES = 64
BISECTION_TOL = 1e-14
BISECTION_MAXITER = 100
DEFAULT_SNAP_TOL = 1e-8


class LevelSetInterface:
    """A closed interface given as the zero set of a scalar function.

    Parameters
    ----------
    func : callable
        Maps an array of points with trailing dimension 2 to the level-set
        values (same leading shape). Must be vectorized.
    gradient : callable, optional
        Analytic gradient, same calling convention, returns trailing dim 2.
    name : str
        Label used in reports.
    """

    def __init__(self, func: Callable, gradient: Optional[Callable] = None, name: str = "custom"):
        self._func = func
        self._gradient = gradient
        self.name = name

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.asarray(self._func(pts), dtype=float)

    def gradient(self, points) -> np.ndarray:
        if self._gradient is None:
            raise NotImplementedError(f"interface {self.name!r} has no analytic gradient")
        return np.asarray(self._gradient(np.asarray(points, dtype=float)), dtype=float)

    def probe_points(self) -> np.ndarray:
        """Points where the level set is known to be extremal, shape (m, 2).

        Meshing tests these in addition to a sampling lattice so that small
        interface components inside a single element are not missed.
        """
        return np.zeros((0, 2))

    def negated(self) -> "LevelSetInterface":
        grad = None if self._gradient is None else (lambda p: -self._gradient(p))
        return LevelSetInterface(lambda p: -self._func(p), grad, name=f"-{self.name}")


class Circle(LevelSetInterface):
    """``phi(x, y) = (x - cx)^2 + (y - cy)^2 - r^2``."""

    def __init__(self, radius: float, center=(0.0, 0.0)):
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)
        super().__init__(self._phi, self._grad, name="circle")

    def _phi(self, p):
        d = p - self.center
        return d[..., 0] ** 2 + d[..., 1] ** 2 - self.radius**2

    def _grad(self, p):
        return 2.0 * (p - self.center)

    def probe_points(self) -> np.ndarray:
        return self.center[None, :].copy()

    def negated(self) -> LevelSetInterface:
        neg = super().negated()
        neg.probe_points = self.probe_points
        return neg

    def project(self, points) -> np.ndarray:
        """Closest point on the circle (used to measure the chord error)."""
        d = np.asarray(points, dtype=float) - self.center
        r = np.linalg.norm(d, axis=-1, keepdims=True)
        return self.center + self.radius * d / r

    def __repr__(self):
        return f"Circle(radius={self.radius!r}, center={tuple(self.center)!r})"


_REGISTRY: Dict[str, Callable[..., LevelSetInterface]] = {}


def register_interface(name: str, factory: Callable[..., LevelSetInterface]) -> None:
    _REGISTRY[name] = factory


def make_interface(name: str, **params) -> LevelSetInterface:
    """Build a registered interface, e.g. ``make_interface("circle", r=0.6)``."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown interface {name!r}; known: {sorted(_REGISTRY)}") from None
    return factory(**params)


register_interface(
    "circle",
    lambda r=np.pi / 5, cx=0.0, cy=0.0: Circle(r, (cx, cy)),
)


@dataclass(frozen=True)
class EdgeCut:
    s: float
    point: np.ndarray
    snapped: bool = False


def classify_point(ls: LevelSetInterface, p, eps: float = 0.0) -> int:
    """Return MINUS, PLUS or ON_INTERFACE for a single point."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    value = float(ls(np.asarray(p, dtype=float)))
    if value < -eps:
        return MINUS
    if value > eps:
        return PLUS
    return ON_INTERFACE


def count_sign_changes(ls: LevelSetInterface, p0, p1, n_samples: int = N_ROOT_SAMPLES) -> np.ndarray:
    """Sign changes of ``ls`` along segments sampled at ``n_samples`` uniform points.

    Samples where the level set vanishes exactly are skipped, so a segment
    that merely starts or ends on the interface does not count as crossing.
    ``p0`` and ``p1`` may be single points or arrays of shape (n, 2).
    """
    p0 = np.atleast_2d(np.asarray(p0, dtype=float))
    p1 = np.atleast_2d(np.asarray(p1, dtype=float))
    t = np.linspace(0.0, 1.0, n_samples)
    pts = p0[:, None, :] + t[None, :, None] * (p1 - p0)[:, None, :]
    sgn = np.sign(ls(pts))
    # carry the last nonzero sign forward over exact zeros
    idx = np.where(sgn != 0, np.arange(n_samples)[None, :], 0)
    np.maximum.accumulate(idx, axis=1, out=idx)
    filled = np.take_along_axis(sgn, idx, axis=1)
    return np.count_nonzero((filled[:, 1:] * filled[:, :-1]) < 0, axis=1)


def bisect_parameters(ls: LevelSetInterface, p0, p1, tol: float = BISECTION_TOL,
                      maxiter: int = BISECTION_MAXITER) -> np.ndarray:
    """Vectorized bisection for the root parameter ``s`` on segments ``p0 -> p1``.

    Every segment must bracket a root (``phi(p0) * phi(p1) < 0``).
    """
    p0 = np.atleast_2d(np.asarray(p0, dtype=float))
    p1 = np.atleast_2d(np.asarray(p1, dtype=float))
    d = p1 - p0
    f0 = ls(p0)
    lo = np.zeros(len(p0))
    hi = np.ones(len(p0))
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = ls(p0 + mid[:, None] * d)
        right = fm * f0 > 0.0
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)
        if np.all(hi - lo <= tol):
            break
    s = 0.5 * (lo + hi)
    # pick whichever bracket end has the smaller residual
    fs = np.abs(ls(p0 + s[:, None] * d))
    for cand in (lo, hi):
        fc = np.abs(ls(p0 + cand[:, None] * d))
        better = fc < fs
        s = np.where(better, cand, s)
        fs = np.where(better, fc, fs)
    return s


def edge_intersection(ls: LevelSetInterface, p0, p1,
                      snap_tol: float = DEFAULT_SNAP_TOL) -> Optional[EdgeCut]:
    """Intersection of the interface with the segment ``p0 -> p1``, or None.

    Raises MultipleRoots when sampled values change sign more than once.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    if np.allclose(p0, p1, rtol=0.0, atol=0.0):
        raise ValueError("degenerate segment")
    if count_sign_changes(ls, p0, p1)[0] > 1:
        raise MultipleRoots(f"interface crosses segment {p0.tolist()} -> {p1.tolist()} more than once")
    f0, f1 = float(ls(p0)), float(ls(p1))
    if not f0 * f1 < 0.0:
        return None
    s = float(bisect_parameters(ls, p0, p1)[0])
    snapped = False
    if s < snap_tol:
        s, snapped = 0.0, True
    elif s > 1.0 - snap_tol:
        s, snapped = 1.0, True
    return EdgeCut(s=s, point=p0 + s * (p1 - p0), snapped=snapped)

"""Quadrature rules on the reference triangle and the unit interval.

Triangle rules are conical (collapsed) Gauss products: Gauss-Jacobi in the
collapsed direction, Gauss-Legendre in the other.  They are exact for
polynomials of total degree ``degree`` and use ``ceil((degree+1)/2)**2``
points, all strictly inside the triangle with positive weights.
"""

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi


@lru_cache(maxsize=None)
def triangle_rule(degree: int = 6):
    """Return barycentric points (m, 3) and weights (m,) summing to one."""
    n = max(1, (degree + 2) // 2)
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    xl, wl = leggauss(n)
    u = 0.5 * (1.0 + xj)
    v = 0.5 * (1.0 + xl)
    wu = wj / 4.0
    wv = wl / 2.0
    U, Vv = np.meshgrid(u, v, indexing="ij")
    x = U.ravel()
    y = (Vv * (1.0 - U)).ravel()
    w = np.outer(wu, wv).ravel() * 2.0
    bary = np.column_stack([1.0 - x - y, x, y])
    bary.setflags(write=False)
    w.setflags(write=False)
    return bary, w


# degree-2 rule at the edge midpoints, exact for products of Whitney functions
EDGE_MIDPOINT_RULE = (np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]),
                      np.full(3, 1.0 / 3.0))


@lru_cache(maxsize=None)
def segment_rule(n: int = 5):
    """Gauss-Legendre points on [0, 1] and weights summing to one."""
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def map_points(X: np.ndarray, bary: np.ndarray) -> np.ndarray:
    """Physical quadrature points of triangles ``X`` (n, 3, 2) -> (n, m, 2)."""
    return np.einsum("mk,nkd->nmd", bary, X)

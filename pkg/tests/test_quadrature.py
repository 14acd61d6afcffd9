from math import factorial

import numpy as np
import pytest

from cutvem.quadrature import EDGE_MIDPOINT_RULE, map_points, segment_rule, triangle_rule


@pytest.mark.parametrize("degree", [1, 2, 4, 6, 8, 10])
def test_triangle_rule_monomial_exactness(degree):
    bary, w = triangle_rule(degree)
    assert np.all(w > 0) and np.all(bary > 0)
    assert w.sum() == pytest.approx(1.0)
    x, y = bary[:, 1], bary[:, 2]
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            # reference triangle area is 1/2, the weights are normalized to 1
            exact = 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2)
            assert np.dot(w, x**a * y**b) == pytest.approx(exact, rel=1e-13, abs=1e-15)


def test_edge_midpoint_rule_is_degree_two():
    bary, w = EDGE_MIDPOINT_RULE
    x, y = bary[:, 1], bary[:, 2]
    for a, b in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        exact = 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2)
        assert np.dot(w, x**a * y**b) == pytest.approx(exact)


@pytest.mark.parametrize("n", [1, 3, 5, 10])
def test_segment_rule(n):
    s, w = segment_rule(n)
    for k in range(2 * n):
        assert np.dot(w, s**k) == pytest.approx(1.0 / (k + 1), rel=1e-13)


def test_map_points():
    X = np.array([[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]])
    bary = np.array([[1 / 3, 1 / 3, 1 / 3], [1.0, 0.0, 0.0]])
    np.testing.assert_allclose(map_points(X, bary)[0], [[2 / 3, 2 / 3], [0.0, 0.0]])

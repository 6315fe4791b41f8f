import math

import numpy as np
import pytest

from resavg._minimize import line_search, minimize_convex


def test_line_search_quadratic():
    t, f = line_search(lambda s: (s - 0.3) ** 2, -5.0, 5.0, 1e-12)
    assert abs(t - 0.3) < 1e-8 and f < 1e-15


def test_line_search_respects_domain():
    # finite only on [-1, 2], minimum at the right edge
    phi = lambda s: -s if -1 <= s <= 2 else math.inf
    t, f = line_search(phi, -100.0, 100.0, 1e-12)
    assert abs(t - 2.0) < 1e-9 and abs(f + 2.0) < 1e-9


def test_line_search_kink():
    t, f = line_search(lambda s: abs(s - 1.7) + 0.1 * s, -10.0, 10.0, 1e-12)
    assert abs(t - 1.7) < 1e-8


def test_minimize_nonseparable_kink():
    # |x - y| + |x + y - 2| has its minimum at (1, 1); coordinate descent alone stalls at kinks
    obj = lambda v: abs(v[0] - v[1]) + abs(v[0] + v[1] - 2) + 1e-3 * (v @ v)
    res = minimize_convex(obj, np.array([5.0, -3.0]))
    grid = np.linspace(-1, 3, 401)
    brute = min(obj(np.array([a, b])) for a in grid for b in grid)
    assert res.value <= brute + 1e-9
    assert not res.at_edge


def test_minimize_with_infinite_region():
    # minimum of x + y over the unit disk
    obj = lambda v: v[0] + v[1] if v @ v <= 1 else math.inf
    res = minimize_convex(obj, np.zeros(2))
    assert abs(res.value + math.sqrt(2)) < 1e-6


def test_minimize_reports_bracket_edge():
    res = minimize_convex(lambda v: float(v[0]), np.zeros(1), bracket=50.0)
    assert res.at_edge and res.value == -50.0


def test_minimize_needs_finite_start():
    with pytest.raises(ValueError):
        minimize_convex(lambda v: math.inf, np.zeros(2))

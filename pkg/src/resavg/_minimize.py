"""Derivative-free minimization of low-dimensional convex functions.

Objectives may take the value ``inf``; each line search first locates the
interval where the objective is finite (it is an interval by convexity),
scans it on a coarse grid and refines with golden-section search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

GRID_POINTS = 64
BRACKET = 1e3
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_BISECTIONS = 200
PATIENCE = 5  # rounds without progress before stopping


@dataclass
class Minimum:
    x: np.ndarray
    value: float
    at_edge: bool
    rounds: int


def _domain_edge(phi, t_far, f_far):
    # phi(0) is finite; returns the finite-side end of dom(phi) towards t_far
    if math.isfinite(f_far):
        return t_far
    inside, outside = 0.0, t_far
    for _ in range(_BISECTIONS):
        mid = 0.5 * (inside + outside)
        if mid == inside or mid == outside:
            break
        if math.isfinite(phi(mid)):
            inside = mid
        else:
            outside = mid
    return inside


def line_search(phi: Callable[[float], float], t_lo: float, t_hi: float, xtol: float):
    """Minimize convex ``phi`` over ``[t_lo, t_hi]`` (which contains 0, phi(0) finite).

    Returns ``(t, phi(t))``.
    """
    best_t, best_f = 0.0, phi(0.0)
    a = _domain_edge(phi, t_lo, phi(t_lo)) if t_lo < 0 else 0.0
    b = _domain_edge(phi, t_hi, phi(t_hi)) if t_hi > 0 else 0.0
    if b - a <= xtol:
        return best_t, best_f
    grid = np.linspace(a, b, GRID_POINTS)
    vals = np.array([phi(t) for t in grid])
    k = int(np.argmin(vals))
    if vals[k] < best_f:
        best_t, best_f = float(grid[k]), float(vals[k])
    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, GRID_POINTS - 1)])
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = phi(c), phi(d)
    while hi - lo > xtol * max(1.0, abs(lo) + abs(hi)):
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = phi(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = phi(d)
    for t, f in ((c, fc), (d, fd)):
        if f < best_f:
            best_t, best_f = float(t), float(f)
    return best_t, best_f


def minimize_convex(
    obj: Callable[[np.ndarray], float],
    x0: np.ndarray,
    bracket: float = BRACKET,
    xtol: float = 1e-12,
    max_rounds: int = 500,
    seed: int = 0,
) -> Minimum:
    """Minimize convex ``obj`` starting from a point where it is finite.

    Coordinate line searches are interleaved with searches along random
    directions and along the last round's displacement, which keeps the
    method from stalling at kinks of non-separable terms. Every coordinate
    is confined to ``[-bracket, bracket]`` (widened to contain ``x0``).
    """
    x = np.array(x0, dtype=float)
    f = obj(x)
    if not math.isfinite(f):
        raise ValueError("minimize_convex needs a finite starting value")
    m = x.size
    lower = np.minimum(-bracket, x)
    upper = np.maximum(bracket, x)
    rng = np.random.default_rng(seed)
    prev_step: Optional[np.ndarray] = None
    rounds = 0
    idle = 0
    for rounds in range(1, max_rounds + 1):
        x_start, f_start = x.copy(), f
        dirs = list(np.eye(m))
        if m > 1:
            for _ in range(m):
                v = rng.standard_normal(m)
                dirs.append(v / np.linalg.norm(v))
            if prev_step is not None and np.linalg.norm(prev_step) > 0:
                dirs.append(prev_step / np.linalg.norm(prev_step))
        for v in dirs:
            t_lo, t_hi = _t_range(x, v, lower, upper)
            t, ft = line_search(lambda s: obj(x + s * v), t_lo, t_hi, xtol)
            if ft < f:
                x = x + t * v
                f = ft
        if idle > 0 and m > 1:
            # line searches stall where descent directions form a thin cone
            # (minima on a curved domain edge); search a whole plane instead
            v1 = prev_step if prev_step is not None and np.linalg.norm(prev_step) > 0 else dirs[0]
            f_before = f
            x, f = _plane_search(obj, x, f, v1, rng.standard_normal(m), lower, upper, xtol)
            if m == 2 and f >= f_before:
                break  # the plane was the whole space
        step = x - x_start
        if np.linalg.norm(step) > 0:
            prev_step = step
        if m == 1:
            # one line search over the whole bracket is already exact
            break
        small = np.linalg.norm(step) <= xtol * max(1.0, float(np.linalg.norm(x)))
        if small or f_start - f <= 1e-15 * max(1.0, abs(f)):
            # a stalled round may only mean the random directions were unlucky
            idle += 1
            if idle >= PATIENCE:
                break
        else:
            idle = 0
    scale = np.maximum(1.0, np.abs(upper))
    at_edge = bool(np.any(x - lower <= 1e-9 * scale) or np.any(upper - x <= 1e-9 * scale))
    return Minimum(x, float(f), at_edge, rounds)


def _plane_search(obj, x, f, v1, v2, lower, upper, xtol):
    """Minimize over the plane ``x + span(v1, v2)`` by nested line searches.

    ``s -> min_t obj(x + s v1 + t v2)`` is convex, so the outer search is a
    plain line search on it.
    """
    v1 = v1 / np.linalg.norm(v1)
    v2 = v2 - (v2 @ v1) * v1
    if np.linalg.norm(v2) == 0:
        return x, f
    v2 = v2 / np.linalg.norm(v2)

    def inner(s):
        y = x + s * v1
        if np.any(y < lower) or np.any(y > upper):
            return math.inf, 0.0
        t_lo, t_hi = _t_range(y, v2, lower, upper)
        g = lambda t: obj(y + t * v2)
        if not math.isfinite(g(0.0)):
            t0 = _finite_on_line(g, t_lo, t_hi)
            if t0 is None:
                return math.inf, 0.0
            t, ft = line_search(lambda t: g(t0 + t), t_lo - t0, t_hi - t0, xtol)
            return ft, t0 + t
        t, ft = line_search(g, t_lo, t_hi, xtol)
        return ft, t

    s_lo, s_hi = _t_range(x, v1, lower, upper)
    s, fs = line_search(lambda s: inner(s)[0], s_lo, s_hi, xtol)
    if fs < f:
        return x + s * v1 + inner(s)[1] * v2, fs
    return x, f


def _finite_on_line(g, t_lo, t_hi):
    for t in np.linspace(t_lo, t_hi, GRID_POINTS + 1):
        if math.isfinite(g(t)):
            return float(t)
    return None


def _t_range(x, v, lower, upper):
    t_lo, t_hi = -math.inf, math.inf
    for xi, vi, lo, hi in zip(x, v, lower, upper):
        if vi > 0:
            t_lo = max(t_lo, (lo - xi) / vi)
            t_hi = min(t_hi, (hi - xi) / vi)
        elif vi < 0:
            t_lo = max(t_lo, (hi - xi) / vi)
            t_hi = min(t_hi, (lo - xi) / vi)
    return min(t_lo, 0.0), max(t_hi, 0.0)

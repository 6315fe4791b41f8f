"""Numerical proximal averages and Fenchel conjugates at desk scale.

The proximal average is evaluated from its reformulation as an infimum over
points ``y_1..y_n`` with ``sum lambda_i y_i = x`` of::

    sum lambda_i f_i(y_i) + (sum lambda_i q(y_i) - q(x)) / mu,   q = ||.||^2 / 2

One ``y_j`` is eliminated through the constraint and the remaining convex
problem is minimized by line searches (see :mod:`resavg._minimize`).
Functions are catalog specs or plain callables on arrays.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from ._minimize import BRACKET, GRID_POINTS, minimize_convex
from .averaging import r_mu
from .extended import ExtNonneg
from .operators import MEMBERSHIP_TOL, domain_point, fn_value, prox
from .results import FAIL, PASS, CheckResult
from .specs import (
    AffineSubspace,
    Ball,
    Box,
    ConvexFunction,
    Halfspace,
    Indicator,
    LinearTilt,
    NormScaled,
    SampleConfig,
    ScaledHalfNormSq,
    SinglePoint,
    SpecError,
    WEIGHT_SUM_TOL,
    as_vector,
)

MAX_DIM = 3
MAX_TERMS = 4

FunctionLike = Union[ConvexFunction, Callable[[np.ndarray], float]]


class BracketExhaustedError(ArithmeticError):
    """The minimizer ended on the search bracket; ``best`` is the best value found."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


class BracketWarning(UserWarning):
    pass


@dataclass
class ProxAverageResult:
    value: float
    points: Optional[List[np.ndarray]]
    at_bracket_edge: bool


def _evaluator(fn: FunctionLike):
    if isinstance(fn, ConvexFunction):
        return lambda y: fn_value(fn, y)
    return lambda y: float(fn(y))


def _domain_point(fn: FunctionLike, x):
    if isinstance(fn, ConvexFunction):
        return domain_point(fn, x)
    return np.array(x, dtype=float)


def _half_sq(v):
    return 0.5 * float(v @ v)


def proximal_average(
    fns: Sequence[FunctionLike],
    lambdas: Sequence[float],
    mu: float,
    x,
    cfg: Optional[SampleConfig] = None,
    bracket: float = BRACKET,
) -> ProxAverageResult:
    """Evaluate ``p_mu(f, lambda)(x)`` with the minimizing ``y_i``."""
    cfg = cfg or SampleConfig()
    x = as_vector(x)
    d = x.size
    n = len(fns)
    if d > MAX_DIM or n > MAX_TERMS:
        raise SpecError(f"proximal averages are limited to d <= {MAX_DIM}, n <= {MAX_TERMS}")
    if n == 0 or len(lambdas) != n:
        raise SpecError("one weight per function")
    lam = np.array([float(w) for w in lambdas])
    if np.any(lam <= 0) or abs(lam.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise SpecError("weights must be positive and sum to 1")
    mu = float(mu)
    if not mu > 0:
        raise SpecError("mu must be positive")
    evals = [_evaluator(f) for f in fns]
    qx = _half_sq(x)

    if n == 1:
        return ProxAverageResult(evals[0](x), [x.copy()], False)

    def objective_for(j):
        others = [i for i in range(n) if i != j]

        def full(ys):
            yj = (x - sum(lam[i] * y for i, y in zip(others, ys))) / lam[j]
            return list(ys), yj

        def phi(v):
            ys = v.reshape(n - 1, d)
            _, yj = full(ys)
            total = 0.0
            for i, y in zip(others + [j], list(ys) + [yj]):
                fv = evals[i](y)
                if not math.isfinite(fv):
                    return math.inf
                total += lam[i] * (fv + _half_sq(y) / mu)
            return total - qx / mu

        return others, full, phi

    # starting points: all y_i = x, or y_i near dom f_i for all i but one
    best = None
    candidates = [(n - 1, np.tile(x, n - 1))]
    for j in range(n):
        others = [i for i in range(n) if i != j]
        candidates.append((j, np.concatenate([_domain_point(fns[i], x) for i in others])))
    for j, v0 in candidates:
        others, full, phi = objective_for(j)
        f0 = phi(v0)
        if math.isfinite(f0) and (best is None or f0 < best[2]):
            best = (j, v0, f0)
    if best is None:
        return ProxAverageResult(math.inf, None, False)

    j, v0, _ = best
    others, full, phi = objective_for(j)
    res = minimize_convex(phi, v0, bracket=bracket, xtol=min(cfg.tol, 1e-10) * 1e-2, seed=cfg.seed)
    ys, yj = full(res.x.reshape(n - 1, d))
    points = [None] * n
    for i, y in zip(others, ys):
        points[i] = np.array(y)
    points[j] = yj
    return ProxAverageResult(res.value, points, res.at_edge)


def proximal_average_value(fns, lambdas, mu, x, cfg: Optional[SampleConfig] = None,
                           bracket: float = BRACKET) -> float:
    """``p_mu(f, lambda)(x)``; ``inf`` when no feasible split of ``x`` is found.

    Raises :class:`BracketExhaustedError` if the minimizer hits the bracket.
    """
    res = proximal_average(fns, lambdas, mu, x, cfg, bracket)
    if res.at_bracket_edge:
        raise BracketExhaustedError(
            f"minimizer reached the bracket [-{bracket:g}, {bracket:g}]", res.value)
    return res.value


def prox_numeric(fn: Callable[[np.ndarray], float], gamma: float, x, cfg=None,
                 bracket: float = BRACKET) -> np.ndarray:
    """Minimizer of ``fn(y) + ||y - x||^2 / (2 gamma)`` by direct search."""
    cfg = cfg or SampleConfig()
    x = as_vector(x)
    gamma = float(gamma)

    def obj(y):
        v = float(fn(y))
        return v + _half_sq(y - x) / gamma if math.isfinite(v) else math.inf

    start = _finite_start(obj, [x, np.zeros_like(x)], bracket)
    if start is None:
        raise ArithmeticError("prox objective is +inf everywhere probed")
    return minimize_convex(obj, start, bracket=bracket, xtol=1e-12, seed=cfg.seed).x


def _finite_start(obj, candidates, bracket):
    for c in candidates:
        if math.isfinite(obj(c)):
            return np.array(c, dtype=float)
    d = np.asarray(candidates[0]).size
    if d == 1:
        for t in np.linspace(-bracket, bracket, 4 * GRID_POINTS + 1):
            if math.isfinite(obj(np.array([t]))):
                return np.array([t])
    return None


def prox_of_average_consistency(fns: Sequence[ConvexFunction], lambdas, mu, x,
                                cfg: Optional[SampleConfig] = None) -> CheckResult:
    """Compare the prox of the numerically evaluated ``p_mu`` with ``sum lambda_i prox``.

    Passes when the two points agree within ``10 * cfg.tol``.
    """
    cfg = cfg or SampleConfig()
    x = as_vector(x)
    mu = float(mu)

    # far probes of the outer search may hit the inner bracket; their values
    # are upper bounds, which is all a losing probe needs
    def p(y):
        return proximal_average(fns, lambdas, mu, y, cfg).value

    lhs = prox_numeric(p, mu, x, cfg)
    if proximal_average(fns, lambdas, mu, lhs, cfg).at_bracket_edge:
        raise BracketExhaustedError(
            f"minimizer reached the bracket [-{BRACKET:g}, {BRACKET:g}]", p(lhs))
    rhs = sum(float(w) * prox(f, mu, x) for f, w in zip(fns, lambdas))
    gap = float(np.linalg.norm(lhs - rhs))
    ok = gap <= 10 * cfg.tol
    return CheckResult(
        PASS if ok else FAIL,
        gap,
        witness=[x, lhs, rhs],
        samples_used=1,
        seed=cfg.seed,
        details={"prox_of_average": lhs, "average_of_prox": rhs},
    )


# ---------------------------------------------------------------------------
# conjugates


def _close(a, b, scale):
    return abs(a - b) <= 1e-9 * max(1.0, scale)


def support_value(c, u: np.ndarray) -> float:
    """``sup_{x in c} <u, x>``."""
    nu = float(np.linalg.norm(u))
    if isinstance(c, SinglePoint):
        return float(u @ c.p)
    if isinstance(c, Ball):
        return float(u @ c.center) + c.radius * nu
    if isinstance(c, AffineSubspace):
        # finite only when u is orthogonal to the directions of the subspace
        if np.linalg.norm(c.basis @ u) > 1e-9 * max(1.0, nu):
            return math.inf
        return float(u @ c.basepoint)
    if isinstance(c, Halfspace):
        a = c.normal
        t = float(u @ a) / float(a @ a)
        if np.linalg.norm(u - t * a) > 1e-9 * max(1.0, nu) or t < -1e-12 * max(1.0, nu):
            return math.inf
        return max(t, 0.0) * c.offset
    if isinstance(c, Box):
        total = 0.0
        for ui, lo, hi in zip(u, c.lower, c.upper):
            if ui > 0:
                total += ui * hi
            elif ui < 0:
                total += ui * lo
            if math.isinf(total):
                return math.inf
        return total
    raise TypeError(f"unknown set spec {type(c).__name__}")


def conjugate_exact(fn: ConvexFunction, u) -> float:
    """Closed-form ``fn*(u)`` for catalog functions."""
    u = as_vector(u, "u")
    if isinstance(fn, ScaledHalfNormSq):
        inv = fn.alpha.inv()
        if inv.is_inf:
            return 0.0 if np.linalg.norm(u) <= MEMBERSHIP_TOL else math.inf
        return 0.5 * float(inv) * float(u @ u)
    if isinstance(fn, NormScaled):
        return 0.0 if np.linalg.norm(u) <= fn.c * (1 + 1e-12) + MEMBERSHIP_TOL else math.inf
    if isinstance(fn, Indicator):
        return support_value(fn.set, u)
    if isinstance(fn, LinearTilt):
        w = u - fn.slope
        base = conjugate_exact(fn.base, w)
        return base + float(w @ fn.shift) if math.isfinite(base) else math.inf
    raise TypeError(f"unknown function spec {type(fn).__name__}")


def conjugate_spec(fn: ConvexFunction, d: int) -> ConvexFunction:
    """Catalog spec of ``fn*`` on R^d when the catalog can express it.

    Raises ``NotImplementedError`` otherwise (e.g. support functions of
    general boxes).
    """
    zero = np.zeros(d)
    if isinstance(fn, ScaledHalfNormSq):
        return ScaledHalfNormSq(fn.alpha.inv())
    if isinstance(fn, NormScaled):
        if fn.c == 0:
            return Indicator(SinglePoint(zero))
        return Indicator(Ball(zero, fn.c))
    if isinstance(fn, Indicator):
        c = fn.set
        if isinstance(c, SinglePoint):
            return LinearTilt(ScaledHalfNormSq(0), c.p)
        if isinstance(c, Ball):
            return LinearTilt(NormScaled(c.radius), c.center)
        if isinstance(c, AffineSubspace):
            k = c.basis.shape[0]
            q, _ = np.linalg.qr(np.vstack([c.basis, np.eye(d)]).T)
            complement = q.T[k:d] if k < d else np.zeros((0, d))
            inner = Indicator(AffineSubspace(zero, complement)) if k < d else Indicator(SinglePoint(zero))
            return LinearTilt(inner, c.basepoint)
        if isinstance(c, Box) and d == 1:
            lo, hi = float(c.lower[0]), float(c.upper[0])
            if lo == -math.inf and hi == math.inf:
                return Indicator(SinglePoint(zero))
            if lo == -math.inf:
                return LinearTilt(Indicator(Box([0.0], [math.inf])), [hi])
            if hi == math.inf:
                return LinearTilt(Indicator(Box([-math.inf], [0.0])), [lo])
            if lo == -hi:
                return NormScaled(hi)
        if isinstance(c, Halfspace) and d == 1:
            a, b = float(c.normal[0]), c.offset
            ray = Box([0.0], [math.inf]) if a > 0 else Box([-math.inf], [0.0])
            return LinearTilt(Indicator(ray), [b / a])
    if isinstance(fn, LinearTilt) and float(fn.slope @ fn.shift) == 0.0:
        return LinearTilt(conjugate_spec(fn.base, d), fn.shift, fn.slope)
    raise NotImplementedError(f"conjugate of {type(fn).__name__} is outside the catalog")


def conjugate_value(fn: FunctionLike, u, cfg: Optional[SampleConfig] = None,
                    bracket: float = BRACKET) -> float:
    """``sup_x <u, x> - fn(x)``.

    Catalog functions use closed forms. Callables (tabulated functions) are
    maximized numerically over ``[-bracket, bracket]^d``; if the maximizer
    lands on the bracket the value is only a lower bound and a
    :class:`BracketWarning` is issued.
    """
    u = as_vector(u, "u")
    if isinstance(fn, ConvexFunction):
        return conjugate_exact(fn, u)
    cfg = cfg or SampleConfig()

    def obj(x):
        v = float(fn(x))
        return v - float(u @ x) if math.isfinite(v) else math.inf

    start = _finite_start(obj, [np.zeros_like(u), u], bracket)
    if start is None:
        return -math.inf  # conjugate of the constant +inf
    res = minimize_convex(obj, start, bracket=bracket, xtol=1e-12, seed=cfg.seed)
    if res.at_edge:
        warnings.warn(f"conjugate maximizer reached the bracket at u={u.tolist()}; "
                      "value is a lower bound", BracketWarning, stacklevel=2)
    return -res.value


# ---------------------------------------------------------------------------
# moduli of uniform monotonicity


def _modulus_fn(phi):
    if isinstance(phi, (int, float)) and not isinstance(phi, bool):
        eps = float(phi)
        return lambda s: eps * float(np.asarray(s).reshape(-1)[0]) ** 2
    return lambda s: float(phi(abs(float(np.asarray(s).reshape(-1)[0]))))


def modulus_average(moduli: Sequence, lambdas, mu, t: float,
                    cfg: Optional[SampleConfig] = None) -> float:
    """Guaranteed monotonicity modulus of the average, evaluated at ``t >= 0``.

    Each modulus is either a number ``eps`` (meaning ``eps * t^2``) or a
    callable on ``[0, inf)``. All-quadratic input uses the closed form
    ``r_mu(eps, lambda) t^2``; otherwise the proximal average with parameter
    ``mu / 2`` of the even extensions is evaluated numerically.
    """
    t = float(t)
    if t < 0:
        raise SpecError("modulus argument must be nonnegative")
    if all(isinstance(m, (int, float, ExtNonneg)) and not isinstance(m, bool) for m in moduli):
        return float(r_mu(list(moduli), list(lambdas), mu)) * t * t
    fns = [_modulus_fn(m) for m in moduli]
    return proximal_average_value(fns, lambdas, float(mu) / 2.0, [t], cfg)

"""Projections, proximity operators and resolvents of the catalog specs.

``resolve(op, gamma, x)`` evaluates ``J_{gamma A}(x) = (Id + gamma A)^{-1}(x)``
in closed form for every operator spec. Point values of ``A`` itself are
recovered from the resolvent by :func:`evaluate_operator`.
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np

from .specs import (
    AffineSubspace,
    Ball,
    Box,
    Constant,
    ConvexFunction,
    ConvexSet,
    Displacement,
    Halfspace,
    Indicator,
    Inverse,
    LinearTilt,
    Matrix,
    NormalCone,
    NormScaled,
    Operator,
    Rotation2D,
    SampleConfig,
    Scaled,
    ScaledHalfNormSq,
    ScaledIdentity,
    Shifted,
    SinglePoint,
    SpecError,
    Subdifferential,
    as_vector,
    check_dim,
)

MEMBERSHIP_TOL = 1e-12


class NotInDomain(ArithmeticError):
    """The point is (numerically) outside the domain of the operator."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def _gamma(gamma) -> float:
    g = float(gamma)
    if not (g > 0 and math.isfinite(g)):
        raise SpecError(f"gamma must be positive and finite, got {gamma!r}")
    return g


# ---------------------------------------------------------------------------
# sets


def project(c: ConvexSet, x) -> np.ndarray:
    """Nearest point of ``c`` to ``x``."""
    x = as_vector(x)
    check_dim(c.dim, x)
    if isinstance(c, Halfspace):
        a = c.normal
        excess = a @ x - c.offset
        if excess <= 0:
            return x.copy()
        return x - (excess / (a @ a)) * a
    if isinstance(c, Box):
        return np.clip(x, c.lower, c.upper)
    if isinstance(c, Ball):
        v = x - c.center
        n = np.linalg.norm(v)
        if n <= c.radius:
            return x.copy()
        return c.center + (c.radius / n) * v
    if isinstance(c, AffineSubspace):
        v = x - c.basepoint
        return c.basepoint + c.basis.T @ (c.basis @ v)
    if isinstance(c, SinglePoint):
        return c.p.copy()
    raise TypeError(f"unknown set spec {type(c).__name__}")


def distance(c: ConvexSet, x) -> float:
    x = as_vector(x)
    return float(np.linalg.norm(project(c, x) - x))


def contains(c: ConvexSet, x, tol=MEMBERSHIP_TOL) -> bool:
    x = as_vector(x)
    return distance(c, x) <= tol * max(1.0, float(np.linalg.norm(x)))


def projector_affine(c: ConvexSet, d: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """``(P, p)`` with ``project(c, x) = P x + p`` when the projection is affine."""
    if isinstance(c, AffineSubspace):
        P = c.basis.T @ c.basis
        return P, c.basepoint - P @ c.basepoint
    if isinstance(c, SinglePoint):
        return np.zeros((d, d)), c.p.copy()
    return None


# ---------------------------------------------------------------------------
# functions


def fn_value(fn: ConvexFunction, x) -> float:
    """Value of a catalog function; ``math.inf`` outside its domain."""
    x = as_vector(x)
    check_dim(fn.dim, x)
    if isinstance(fn, ScaledHalfNormSq):
        a = fn.alpha
        if a.is_inf:
            return 0.0 if np.linalg.norm(x) <= MEMBERSHIP_TOL else math.inf
        return 0.5 * float(a) * float(x @ x)
    if isinstance(fn, NormScaled):
        return fn.c * float(np.linalg.norm(x))
    if isinstance(fn, Indicator):
        return 0.0 if contains(fn.set, x) else math.inf
    if isinstance(fn, LinearTilt):
        return fn_value(fn.base, x - fn.shift) + float(fn.slope @ x)
    raise TypeError(f"unknown function spec {type(fn).__name__}")


def prox(fn: ConvexFunction, gamma, x) -> np.ndarray:
    """Minimizer of ``fn(y) + ||y - x||^2 / (2 gamma)``."""
    g = _gamma(gamma)
    x = as_vector(x)
    check_dim(fn.dim, x)
    if isinstance(fn, ScaledHalfNormSq):
        if fn.alpha.is_inf:
            return np.zeros_like(x)
        return x / (1.0 + g * float(fn.alpha))
    if isinstance(fn, NormScaled):
        n = np.linalg.norm(x)
        if n == 0:
            return np.zeros_like(x)
        return max(0.0, 1.0 - g * fn.c / n) * x
    if isinstance(fn, Indicator):
        return project(fn.set, x)
    if isinstance(fn, LinearTilt):
        return fn.shift + prox(fn.base, g, x - g * fn.slope - fn.shift)
    raise TypeError(f"unknown function spec {type(fn).__name__}")


def domain_point(fn: ConvexFunction, x) -> np.ndarray:
    """A point of ``dom fn`` near ``x`` (exactly ``x`` for full-domain functions)."""
    x = as_vector(x)
    if isinstance(fn, Indicator):
        return project(fn.set, x)
    if isinstance(fn, ScaledHalfNormSq) and fn.alpha.is_inf:
        return np.zeros_like(x)
    if isinstance(fn, LinearTilt):
        return fn.shift + domain_point(fn.base, x - fn.shift)
    return x.copy()


# ---------------------------------------------------------------------------
# operators


def resolve(op: Operator, gamma, x) -> np.ndarray:
    """``J_{gamma op}(x)``."""
    g = _gamma(gamma)
    x = as_vector(x)
    check_dim(op.dim, x)
    if isinstance(op, Matrix):
        return np.linalg.solve(np.eye(x.size) + g * op.M, x)
    if isinstance(op, Rotation2D):
        return np.linalg.solve(np.eye(2) + g * op.matrix, x)
    if isinstance(op, ScaledIdentity):
        if op.alpha.is_inf:
            return np.zeros_like(x)
        return x / (1.0 + g * float(op.alpha))
    if isinstance(op, NormalCone):
        # projection does not depend on gamma since gamma N_C = N_C
        return project(op.set, x)
    if isinstance(op, Subdifferential):
        return prox(op.fn, g, x)
    if isinstance(op, Constant):
        return x - g * op.z
    if isinstance(op, Inverse):
        return x - g * resolve(op.inner, 1.0 / g, x / g)
    if isinstance(op, Shifted):
        x0 = op.argument_shift
        return x0 + resolve(op.inner, g, x + g * op.range_shift - x0)
    if isinstance(op, Scaled):
        return resolve(op.inner, g * op.factor, x)
    if isinstance(op, Displacement):
        # z + 2g (z - J_B z) = x  gives  J_B z = J_{(1+2g) B} x
        s = 2.0 * g + 1.0
        return (x + 2.0 * g * resolve(op.inner, s, x)) / s
    raise TypeError(f"unknown operator spec {type(op).__name__}")


def resolvent_affine(op: Operator, gamma, d: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """``(J, j)`` with ``resolve(op, gamma, x) = J x + j``, or None if not affine."""
    g = _gamma(gamma)
    if op.dim is not None and op.dim != d:
        raise SpecError(f"operator has dimension {op.dim}, expected {d}")
    eye = np.eye(d)
    zero = np.zeros(d)
    if isinstance(op, Matrix):
        return np.linalg.inv(eye + g * op.M), zero
    if isinstance(op, Rotation2D):
        return np.linalg.inv(eye + g * op.matrix), zero
    if isinstance(op, ScaledIdentity):
        if op.alpha.is_inf:
            return np.zeros((d, d)), zero
        return eye / (1.0 + g * float(op.alpha)), zero
    if isinstance(op, NormalCone):
        return projector_affine(op.set, d)
    if isinstance(op, Subdifferential):
        return _prox_affine(op.fn, g, d)
    if isinstance(op, Constant):
        return eye, -g * op.z
    if isinstance(op, Inverse):
        inner = resolvent_affine(op.inner, 1.0 / g, d)
        if inner is None:
            return None
        J, j = inner
        return eye - J, -g * j
    if isinstance(op, Shifted):
        inner = resolvent_affine(op.inner, g, d)
        if inner is None:
            return None
        J, j = inner
        x0 = op.argument_shift
        return J, x0 + J @ (g * op.range_shift - x0) + j
    if isinstance(op, Scaled):
        return resolvent_affine(op.inner, g * op.factor, d)
    if isinstance(op, Displacement):
        inner = resolvent_affine(op.inner, 2.0 * g + 1.0, d)
        if inner is None:
            return None
        J, j = inner
        s = 2.0 * g + 1.0
        return (eye + 2.0 * g * J) / s, 2.0 * g * j / s
    raise TypeError(f"unknown operator spec {type(op).__name__}")


def _prox_affine(fn: ConvexFunction, g: float, d: int):
    if isinstance(fn, ScaledHalfNormSq):
        if fn.alpha.is_inf:
            return np.zeros((d, d)), np.zeros(d)
        return np.eye(d) / (1.0 + g * float(fn.alpha)), np.zeros(d)
    if isinstance(fn, NormScaled) and fn.c == 0:
        return np.eye(d), np.zeros(d)
    if isinstance(fn, Indicator):
        return projector_affine(fn.set, d)
    if isinstance(fn, LinearTilt):
        base = _prox_affine(fn.base, g, d)
        if base is None:
            return None
        P, p = base
        return P, fn.shift + P @ (-g * fn.slope - fn.shift) + p
    return None


def affine_action(op: Operator, d: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """``(M, b)`` with ``op(x) = M x + b`` for single-valued affine operators."""
    if isinstance(op, Matrix):
        return np.array(op.M), np.zeros(d)
    if isinstance(op, Rotation2D):
        return op.matrix, np.zeros(d)
    if isinstance(op, ScaledIdentity) and not op.alpha.is_inf:
        return float(op.alpha) * np.eye(d), np.zeros(d)
    if isinstance(op, Constant):
        return np.zeros((d, d)), np.array(op.z)
    res = resolvent_affine(op, 1.0, d)
    if res is None:
        return None
    J, j = res
    try:
        Jinv = np.linalg.inv(J)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(Jinv)) or np.linalg.cond(J) > 1e12:
        return None
    # J z + j = x  <=>  z = J^{-1}(x - j),  A x = z - x
    return Jinv - np.eye(d), -Jinv @ j


def linear_matrix(op: Operator, d: Optional[int] = None) -> Optional[np.ndarray]:
    """Matrix of ``op`` when it is a linear map on R^d."""
    d = op.dim if d is None else d
    if d is None:
        return None
    aff = affine_action(op, d)
    if aff is None or np.linalg.norm(aff[1]) > 0:
        return None
    return aff[0]


def is_single_valued(op: Operator) -> bool:
    """Conservative: True only for specs that are single-valued everywhere."""
    if isinstance(op, (Matrix, Rotation2D, Constant, Displacement)):
        return True
    if isinstance(op, ScaledIdentity):
        return not op.alpha.is_inf
    if isinstance(op, Subdifferential):
        fn = op.fn
        while isinstance(fn, LinearTilt):
            fn = fn.base
        return isinstance(fn, ScaledHalfNormSq) and not fn.alpha.is_inf or (
            isinstance(fn, NormScaled) and fn.c == 0)
    if isinstance(op, (Shifted, Scaled)):
        return is_single_valued(op.inner)
    if isinstance(op, Inverse):
        return op.dim is not None and affine_action(op, op.dim) is not None
    return False


def minty_invert(T, x: np.ndarray, cfg: SampleConfig) -> np.ndarray:
    """Solve ``T(z) = x`` for a firmly nonexpansive ``T``.

    Iterates ``z <- z - T(z) + x`` from ``z = x``; raises :class:`NotInDomain`
    if the residual ``||T(z) - x||`` never drops to ``cfg.tol``.
    """
    z = x.copy()
    res = math.inf
    for k in range(int(cfg.max_iter)):
        tz = T(z)
        res = float(np.linalg.norm(tz - x))
        if res <= cfg.tol:
            return z
        z = z - tz + x
    raise NotInDomain(
        f"resolvent inversion did not reach tol={cfg.tol:g} in {cfg.max_iter} iterations "
        f"(residual {res:.3g})",
        residual=res,
        iterations=int(cfg.max_iter),
    )


def evaluate_operator(op: Operator, x, cfg: Optional[SampleConfig] = None) -> np.ndarray:
    """A point ``u`` of ``op(x)``.

    Affine single-valued specs are applied directly. Otherwise ``z`` with
    ``J_op(z) = x`` is found by :func:`minty_invert` and ``u = z - x``; at
    points where ``op`` is set-valued this is the selection reached from
    ``z = x`` (see :func:`is_single_valued`).
    """
    cfg = cfg or SampleConfig()
    x = as_vector(x)
    check_dim(op.dim, x)
    aff = affine_action(op, x.size)
    if aff is not None:
        M, b = aff
        return M @ x + b
    z = minty_invert(lambda v: resolve(op, 1.0, v), x, cfg)
    return z - x

"""The resolvent average ``R_mu(A, lambda)`` and the scalar average ``r_mu``.

The average is defined through its resolvent::

    J_{mu R} = sum_i lambda_i J_{mu A_i}

so everything here is computed from the individual resolvents. When every
averaged resolvent is affine the average is returned in closed form;
otherwise points of ``R`` are obtained by inverting the averaged resolvent.
"""

from __future__ import annotations

from fractions import Fraction  # noqa: F401
from typing import Optional, Sequence

import numpy as np

from .extended import ExtNonneg
from .operators import (
    NotInDomain,
    minty_invert,
    resolve,
    resolvent_affine,
)
from .specs import (
    AverageSpec,
    Inverse,
    SampleConfig,
    SpecError,
    WEIGHT_SUM_TOL,
    as_monotone_matrix,
    as_vector,
    check_dim,
)


class SingularAverageError(ArithmeticError):
    """The averaged resolvent matrix is numerically singular.

    Cannot happen for monotone matrix inputs; raised only if rounding
    makes it so.
    """


def _check_weights(lambdas, n):
    lambdas = [float(w) for w in lambdas]
    if len(lambdas) != n:
        raise SpecError("one weight per entry")
    if any(w <= 0 for w in lambdas) or abs(sum(lambdas) - 1.0) > WEIGHT_SUM_TOL:
        raise SpecError("weights must be positive and sum to 1")
    return lambdas


def averaged_resolvent(avg: AverageSpec, x) -> np.ndarray:
    """``sum_i lambda_i J_{mu A_i}(x)``, i.e. ``J_{mu R_mu(A, lambda)}(x)``."""
    x = as_vector(x)
    check_dim(avg.dim, x)
    mu = float(avg.mu)
    out = np.zeros_like(x)
    for op, w in avg.items:
        out += float(w) * resolve(op, mu, x)
    return out


def resolvent_average_matrix(matrices: Sequence, lambdas: Sequence, mu=1.0) -> np.ndarray:
    """``(sum_i lambda_i (M_i + mu^{-1} I)^{-1})^{-1} - mu^{-1} I``.

    >>> rot = [[0.0, -1.0], [1.0, 0.0]]
    >>> np.round(13 * resolvent_average_matrix([np.eye(2), rot], [1/3, 2/3]), 12)
    array([[  5., -12.],
           [ 12.,   5.]])
    """
    mats = [as_monotone_matrix(m) for m in matrices]
    if not mats:
        raise SpecError("need at least one matrix")
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise SpecError("matrices must share one dimension")
    lambdas = _check_weights(lambdas, len(mats))
    inv_mu = 1.0 / float(mu)
    eye = np.eye(d)
    S = sum(w * np.linalg.inv(m + inv_mu * eye) for m, w in zip(mats, lambdas))
    if np.linalg.cond(S) > 1e14:
        raise SingularAverageError("averaged resolvent matrix is singular")
    return np.linalg.inv(S) - inv_mu * eye


def averaged_resolvent_affine(avg: AverageSpec, d: Optional[int] = None):
    """``(T, t)`` with ``averaged_resolvent(avg, x) = T x + t``, or None."""
    d = avg.dim if d is None else d
    if d is None:
        return None
    mu = float(avg.mu)
    T = np.zeros((d, d))
    t = np.zeros(d)
    for op, w in avg.items:
        aff = resolvent_affine(op, mu, d)
        if aff is None:
            return None
        T += float(w) * aff[0]
        t += float(w) * aff[1]
    return T, t


def resolvent_average_affine(avg: AverageSpec, d: Optional[int] = None):
    """``(M, b)`` with ``R_mu(A, lambda)(x) = M x + b`` when that is available.

    Requires every averaged resolvent to be affine and the averaged
    resolvent to be invertible (otherwise ``R`` does not have full domain).
    """
    aff = averaged_resolvent_affine(avg, d)
    if aff is None:
        return None
    T, t = aff
    if np.linalg.cond(T) > 1e12:
        return None
    Tinv = np.linalg.inv(T)
    mu = float(avg.mu)
    n = T.shape[0]
    return (Tinv - np.eye(n)) / mu, -(Tinv @ t) / mu


def evaluate_average(avg: AverageSpec, x, cfg: Optional[SampleConfig] = None) -> np.ndarray:
    """A point ``u`` of ``R_mu(A, lambda)(x)``.

    Inverts the averaged resolvent ``T`` by :func:`~resavg.operators.minty_invert`
    and returns ``(z - x) / mu``; affine averages are applied directly.
    Raises :class:`~resavg.operators.NotInDomain` off the domain.
    """
    cfg = cfg or SampleConfig()
    x = as_vector(x)
    check_dim(avg.dim, x)
    aff = resolvent_average_affine(avg, x.size)
    if aff is not None:
        M, b = aff
        return M @ x + b
    z = minty_invert(lambda v: averaged_resolvent(avg, v), x, cfg)
    return (z - x) / float(avg.mu)


def graph_decomposition(avg: AverageSpec, x, u):
    """Split a graph point ``(x, u)`` of the average over the ``A_i``.

    Returns ``[(x_i, u_i)]`` with ``u_i`` in ``A_i(x_i)``,
    ``sum lambda_i x_i = x`` and ``sum lambda_i u_i = u``.
    """
    x = as_vector(x)
    u = as_vector(u, "u")
    mu = float(avg.mu)
    z = x + mu * u
    parts = []
    for op, _ in avg.items:
        xi = resolve(op, mu, z)
        parts.append((xi, (z - xi) / mu))
    return parts


def inverse_average(avg: AverageSpec) -> AverageSpec:
    """Spec of ``R_mu(A, lambda)^{-1} = R_{1/mu}(A^{-1}, lambda)``."""
    mu = avg.mu
    inv_mu = 1 / mu if not isinstance(mu, float) else 1.0 / mu
    return AverageSpec(tuple(Inverse(op) for op in avg.ops), avg.weights, inv_mu)


def r_mu(alphas: Sequence, lambdas: Sequence, mu=1) -> ExtNonneg:
    """``[sum_i lambda_i (alpha_i + 1/mu)^{-1}]^{-1} - 1/mu`` in [0, ∞].

    Exact when ``alphas``, ``lambdas`` and ``mu`` are ints or Fractions.

    >>> r_mu([2, 5], [Fraction(1, 2), Fraction(1, 2)])
    ExtNonneg(3)
    >>> r_mu([0, "inf"], [Fraction(1, 2), Fraction(1, 2)])
    ExtNonneg(1)
    """
    alphas = [a if isinstance(a, ExtNonneg) else ExtNonneg(a) for a in alphas]
    if len(alphas) != len(lambdas) or not alphas:
        raise SpecError("one weight per constant")
    if any(w <= 0 for w in lambdas):
        raise SpecError("weights must be positive")
    if abs(float(sum(lambdas)) - 1.0) > WEIGHT_SUM_TOL:
        raise SpecError("weights must sum to 1")
    mu = ExtNonneg(mu)
    if mu.is_zero or mu.is_inf:
        raise SpecError("mu must be positive and finite")
    inv_mu = mu.inv()
    total = ExtNonneg(0)
    for a, w in zip(alphas, lambdas):
        total = total + ExtNonneg(w) * (a + inv_mu).inv()
    return total.inv() - inv_mu


__all__ = [
    "NotInDomain",
    "SingularAverageError",
    "averaged_resolvent",
    "averaged_resolvent_affine",
    "evaluate_average",
    "graph_decomposition",
    "inverse_average",
    "r_mu",
    "resolvent_average_affine",
    "resolvent_average_matrix",
]

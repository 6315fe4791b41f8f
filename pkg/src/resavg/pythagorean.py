"""Rational rotations from averaging the identity with a quarter turn.

For ``A_1 = Id`` and ``A_2`` the counterclockwise rotation by pi/2, the
resolvent average at a rational weight ``lambda = p/q`` is again a rotation
with rational entries, and its entries are a Pythagorean triple over a
common denominator. Everything in this module is exact integer/rational
arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Tuple

_Row = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class RationalMatrix2:
    """2x2 matrix of Fractions ``[[a, b], [c, d]]`` (kept in lowest terms)."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    @classmethod
    def from_rows(cls, rows) -> "RationalMatrix2":
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> "RationalMatrix2":
        return cls(1, 0, 0, 1)

    def rows(self) -> List[List[Fraction]]:
        return [[self.a, self.b], [self.c, self.d]]

    def __add__(self, other: "RationalMatrix2") -> "RationalMatrix2":
        return RationalMatrix2(self.a + other.a, self.b + other.b,
                               self.c + other.c, self.d + other.d)

    def __sub__(self, other: "RationalMatrix2") -> "RationalMatrix2":
        return RationalMatrix2(self.a - other.a, self.b - other.b,
                               self.c - other.c, self.d - other.d)

    def scale(self, s) -> "RationalMatrix2":
        s = Fraction(s)
        return RationalMatrix2(s * self.a, s * self.b, s * self.c, s * self.d)

    def __matmul__(self, other: "RationalMatrix2") -> "RationalMatrix2":
        return RationalMatrix2(
            self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d,
        )

    @property
    def T(self) -> "RationalMatrix2":
        return RationalMatrix2(self.a, self.c, self.b, self.d)

    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def inv(self) -> "RationalMatrix2":
        det = self.det()
        if det == 0:
            raise ZeroDivisionError("singular rational matrix")
        return RationalMatrix2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def is_rotation(self) -> bool:
        """Orthogonal with determinant one, checked exactly."""
        return self.T @ self == RationalMatrix2.identity() and self.det() == 1

    def to_json(self) -> List[List[str]]:
        return [[_frac_str(v) for v in row] for row in self.rows()]


def _frac_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class PythagoreanTriple:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0:
            raise ValueError("triple entries must be positive")
        if self.a * self.a + self.b * self.b != self.c * self.c:
            raise ValueError(f"{self.a}^2 + {self.b}^2 != {self.c}^2")

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def primitive(self) -> "PythagoreanTriple":
        g = gcd(gcd(self.a, self.b), self.c)
        return PythagoreanTriple(self.a // g, self.b // g, self.c // g)


QUARTER_TURN = RationalMatrix2(0, -1, 1, 0)


def _resolvent(m: RationalMatrix2) -> RationalMatrix2:
    return (RationalMatrix2.identity() + m).inv()


def identity_rotation_average(lam: Fraction) -> RationalMatrix2:
    """``R((Id, quarter turn), (lam, 1 - lam))`` computed from the resolvents."""
    lam = Fraction(lam)
    if not 0 < lam < 1:
        raise ValueError("weight must lie strictly between 0 and 1")
    J1 = _resolvent(RationalMatrix2.identity())
    J2 = _resolvent(QUARTER_TURN)
    T = J1.scale(lam) + J2.scale(1 - lam)
    return T.inv() - RationalMatrix2.identity()


def rotation_average_rational(p: int, q: int) -> Tuple[RationalMatrix2, PythagoreanTriple]:
    """Exact average at ``lambda = p/q`` and the triple it encodes.

    The triple is ``(p(2q - p), 2q(q - p), p^2 - 2pq + 2q^2)``, not reduced.

    >>> m, t = rotation_average_rational(1, 2)
    >>> t.as_tuple(), m.to_json()
    ((3, 4, 5), [['3/5', '-4/5'], ['4/5', '3/5']])
    """
    if not (isinstance(p, int) and isinstance(q, int)) or not 0 < p < q:
        raise ValueError("need integers 0 < p < q")
    m = identity_rotation_average(Fraction(p, q))
    triple = PythagoreanTriple(p * (2 * q - p), 2 * q * (q - p), p * p - 2 * p * q + 2 * q * q)
    return m, triple


def euclid_triple(k: int, l: int) -> PythagoreanTriple:
    """``(l^2 - k^2, 2kl, k^2 + l^2)``."""
    if not (isinstance(k, int) and isinstance(l, int)) or not 0 < k < l:
        raise ValueError("need integers 0 < k < l")
    return PythagoreanTriple(l * l - k * k, 2 * k * l, k * k + l * l)


def sweep(qmax: int):
    """Yield ``(p, q, matrix, triple)`` for all ``1 <= p < q <= qmax``."""
    for q in range(2, qmax + 1):
        for p in range(1, q):
            m, t = rotation_average_rational(p, q)
            yield p, q, m, t

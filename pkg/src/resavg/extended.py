"""Nonnegative extended reals with the conventions 0⁻¹ = ∞, ∞⁻¹ = 0, 0·∞ = 0.

Values may be ints, :class:`fractions.Fraction` or floats. Exact inputs stay
exact through every operation, which is what makes identities such as the
inversion rule for :func:`resavg.averaging.r_mu` checkable without rounding.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational, Real
from typing import Union

Scalar = Union[int, Fraction, float]

# float subtraction below zero by at most this (relative) amount is rounding
_NEG_SLACK = 1e-12


class ExtNonnegError(ArithmeticError):
    """An operation left [0, ∞] or is not licensed by the conventions."""


def _coerce(value) -> Scalar:
    if isinstance(value, ExtNonneg):
        return value.value
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        value = Fraction(value)
    if isinstance(value, bool) or not isinstance(value, Real):
        raise TypeError(f"not a real number: {value!r}")
    if isinstance(value, Rational):
        return value if isinstance(value, (int, Fraction)) else Fraction(value)
    value = float(value)
    if math.isnan(value):
        raise ExtNonnegError("NaN is not an extended nonnegative real")
    return value


class ExtNonneg:
    """A value in [0, ∞].

    >>> ExtNonneg(0).inv()
    ExtNonneg(inf)
    >>> ExtNonneg("inf") * 0
    ExtNonneg(0)
    """

    __slots__ = ("_value",)

    def __init__(self, value):
        v = _coerce(value)
        if v < 0:
            raise ExtNonnegError(f"negative value {v!r}")
        object.__setattr__(self, "_value", v)

    def __setattr__(self, name, value):
        raise AttributeError("ExtNonneg is immutable")

    @property
    def value(self) -> Scalar:
        return self._value

    @property
    def is_inf(self) -> bool:
        return self._value == math.inf

    @property
    def is_zero(self) -> bool:
        return self._value == 0

    @property
    def is_exact(self) -> bool:
        """Rational values, and ∞, which only ever enters through the conventions."""
        return isinstance(self._value, (int, Fraction)) or self.is_inf

    @classmethod
    def inf(cls) -> "ExtNonneg":
        return cls(math.inf)

    def inv(self) -> "ExtNonneg":
        if self.is_zero:
            return ExtNonneg(math.inf)
        if self.is_inf:
            return ExtNonneg(0)
        if isinstance(self._value, (int, Fraction)):
            return ExtNonneg(1 / Fraction(self._value))
        return ExtNonneg(1.0 / self._value)

    def __add__(self, other) -> "ExtNonneg":
        o = ExtNonneg(other)
        if self.is_inf or o.is_inf:
            return ExtNonneg(math.inf)
        return ExtNonneg(self._value + o._value)

    __radd__ = __add__

    def __sub__(self, other) -> "ExtNonneg":
        o = ExtNonneg(other)
        if o.is_inf:
            raise ExtNonnegError("subtracting ∞ is not defined in [0, ∞]")
        if self.is_inf:
            return ExtNonneg(math.inf)
        diff = self._value - o._value
        if diff < 0:
            scale = max(abs(self._value), abs(o._value))
            if isinstance(diff, float) and -diff <= _NEG_SLACK * scale:
                diff = 0.0
            else:
                raise ExtNonnegError(f"{self._value!r} - {o._value!r} < 0")
        return ExtNonneg(diff)

    def __mul__(self, other) -> "ExtNonneg":
        o = ExtNonneg(other)
        if self.is_zero or o.is_zero:
            return ExtNonneg(0)
        if self.is_inf or o.is_inf:
            return ExtNonneg(math.inf)
        return ExtNonneg(self._value * o._value)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExtNonneg":
        return self * ExtNonneg(other).inv()

    def __float__(self) -> float:
        return float(self._value)

    def _cmp_value(self, other):
        return other.value if isinstance(other, ExtNonneg) else _coerce(other)

    def __eq__(self, other):
        try:
            return self._value == self._cmp_value(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return self._value < self._cmp_value(other)

    def __le__(self, other):
        return self._value <= self._cmp_value(other)

    def __gt__(self, other):
        return self._value > self._cmp_value(other)

    def __ge__(self, other):
        return self._value >= self._cmp_value(other)

    def __hash__(self):
        return hash(self._value)

    def __repr__(self):
        if self.is_inf:
            return "ExtNonneg(inf)"
        return f"ExtNonneg({self._value})"

    def to_json(self):
        """``"inf"`` for ∞, ``"p/q"`` for non-integer fractions, else a number."""
        if self.is_inf:
            return "inf"
        if isinstance(self._value, Fraction):
            if self._value.denominator == 1:
                return int(self._value.numerator)
            return f"{self._value.numerator}/{self._value.denominator}"
        return self._value

    @classmethod
    def from_json(cls, obj) -> "ExtNonneg":
        return cls(obj)

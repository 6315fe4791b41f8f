"""Specification types for sets, functions, operators and resolvent averages.

Every spec is an immutable dataclass. Vectors and matrices are stored as
read-only float arrays. Operator specs always denote maximally monotone
operators; anything that would violate that is rejected at construction.

All specs round-trip through a tagged JSON encoding (``{"kind": ..., ...}``)
with ∞ written as the string ``"inf"``; see :func:`to_json` / :func:`from_json`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .extended import ExtNonneg

# smallest eigenvalue of (M + Mᵀ)/2 still accepted as monotone
MONOTONE_EIG_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-9


class SpecError(ValueError):
    """Invalid specification (bad field, wrong dimension, not monotone...)."""


class DimensionError(SpecError):
    pass


def as_vector(x, name="x") -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a nonempty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SpecError(f"{name} has non-finite entries")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def check_dim(dim: Optional[int], x: np.ndarray, what="vector"):
    if dim is not None and x.shape[0] != dim:
        raise DimensionError(f"{what} has dimension {x.shape[0]}, expected {dim}")


def _merge_dims(*dims):
    known = {d for d in dims if d is not None}
    if len(known) > 1:
        raise DimensionError(f"mixed dimensions {sorted(known)}")
    return known.pop() if known else None


# ---------------------------------------------------------------------------
# convex sets


class ConvexSet:
    """Nonempty closed convex subset of R^d."""

    dim: Optional[int] = None


@dataclass(frozen=True, eq=False)
class Halfspace(ConvexSet):
    """``{x : <normal, x> <= offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        a = as_vector(self.normal, "normal")
        if np.linalg.norm(a) == 0:
            raise SpecError("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", _frozen(a))
        object.__setattr__(self, "offset", float(self.offset))
        if not math.isfinite(self.offset):
            raise SpecError("halfspace offset must be finite")

    @property
    def dim(self):
        return self.normal.shape[0]


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    """Componentwise bounds; entries may be infinite."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).reshape(-1)
        hi = np.array(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.size == 0:
            raise DimensionError("box bounds must be vectors of equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise SpecError("box needs lower <= upper componentwise")
        if np.any(lo == math.inf) or np.any(hi == -math.inf):
            raise SpecError("box would be empty")
        object.__setattr__(self, "lower", _frozen(lo))
        object.__setattr__(self, "upper", _frozen(hi))

    @property
    def dim(self):
        return self.lower.shape[0]


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(as_vector(self.center, "center")))
        r = float(self.radius)
        if not (r > 0 and math.isfinite(r)):
            raise SpecError("ball radius must be positive and finite")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self):
        return self.center.shape[0]


@dataclass(frozen=True, eq=False)
class AffineSubspace(ConvexSet):
    """``basepoint + span(basis)``; the basis is orthonormalized on construction.

    ``basis`` holds the direction vectors as rows.
    """

    basepoint: np.ndarray
    basis: np.ndarray = None

    def __post_init__(self):
        p = as_vector(self.basepoint, "basepoint")
        d = p.shape[0]
        if self.basis is None or len(self.basis) == 0:
            b = np.zeros((0, d))
        else:
            b = np.array(self.basis, dtype=float)
            if b.ndim != 2 or b.shape[1] != d:
                raise DimensionError("basis rows must match the basepoint dimension")
            if not np.all(np.isfinite(b)):
                raise SpecError("basis has non-finite entries")
            q, r = np.linalg.qr(b.T)
            diag = np.abs(np.diag(r))
            if diag.size and diag.min() <= 1e-12 * max(1.0, diag.max()):
                raise SpecError("affine subspace directions are linearly dependent")
            # fix signs so that orthonormal input comes back unchanged
            b = (q * np.sign(np.diag(r))).T
        object.__setattr__(self, "basepoint", _frozen(p))
        object.__setattr__(self, "basis", _frozen(b))

    @property
    def dim(self):
        return self.basepoint.shape[0]


@dataclass(frozen=True, eq=False)
class SinglePoint(ConvexSet):
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _frozen(as_vector(self.p, "p")))

    @property
    def dim(self):
        return self.p.shape[0]


# ---------------------------------------------------------------------------
# convex functions


class ConvexFunction:
    """Proper lsc convex function with a closed-form prox."""

    dim: Optional[int] = None


def _ext(value) -> ExtNonneg:
    return value if isinstance(value, ExtNonneg) else ExtNonneg(value)


@dataclass(frozen=True, eq=False)
class ScaledHalfNormSq(ConvexFunction):
    """``alpha * ||x||^2 / 2``; ``alpha = inf`` is the indicator of {0}."""

    alpha: ExtNonneg

    def __post_init__(self):
        object.__setattr__(self, "alpha", _ext(self.alpha))


@dataclass(frozen=True, eq=False)
class NormScaled(ConvexFunction):
    """``c * ||x||``."""

    c: float

    def __post_init__(self):
        c = float(self.c)
        if not (c >= 0 and math.isfinite(c)):
            raise SpecError("norm scale must be a finite nonnegative number")
        object.__setattr__(self, "c", c)


@dataclass(frozen=True, eq=False)
class Indicator(ConvexFunction):
    set: ConvexSet

    def __post_init__(self):
        if not isinstance(self.set, ConvexSet):
            raise SpecError("indicator needs a ConvexSet")

    @property
    def dim(self):
        return self.set.dim


@dataclass(frozen=True, eq=False)
class LinearTilt(ConvexFunction):
    """``x -> base(x - shift) + <slope, x>``."""

    base: ConvexFunction
    slope: np.ndarray
    shift: np.ndarray = None

    def __post_init__(self):
        if not isinstance(self.base, ConvexFunction):
            raise SpecError("linear tilt needs a ConvexFunction base")
        s = as_vector(self.slope, "slope")
        c = np.zeros_like(s) if self.shift is None else as_vector(self.shift, "shift")
        _merge_dims(self.base.dim, s.shape[0], c.shape[0])
        object.__setattr__(self, "slope", _frozen(s))
        object.__setattr__(self, "shift", _frozen(c))

    @property
    def dim(self):
        return self.slope.shape[0]


# ---------------------------------------------------------------------------
# operators


class Operator:
    """Maximally monotone operator with an exactly computable resolvent."""

    dim: Optional[int] = None


def _check_monotone_matrix(m: np.ndarray) -> None:
    sym = 0.5 * (m + m.T)
    lam = np.linalg.eigvalsh(sym).min()
    if lam < -MONOTONE_EIG_TOL:
        raise SpecError(f"matrix is not monotone (min eigenvalue of symmetric part {lam:.3g})")


def as_monotone_matrix(m) -> np.ndarray:
    arr = np.array(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.size == 0:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SpecError("matrix has non-finite entries")
    _check_monotone_matrix(arr)
    return arr


@dataclass(frozen=True, eq=False)
class Matrix(Operator):
    M: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "M", _frozen(as_monotone_matrix(self.M)))

    @property
    def dim(self):
        return self.M.shape[0]


@dataclass(frozen=True, eq=False)
class ScaledIdentity(Operator):
    """``alpha * Id``; ``alpha = inf`` is the normal cone of {0}."""

    alpha: ExtNonneg

    def __post_init__(self):
        object.__setattr__(self, "alpha", _ext(self.alpha))


@dataclass(frozen=True, eq=False)
class Rotation2D(Operator):
    """Counterclockwise rotation of the plane by ``angle`` in [0, pi/2]."""

    angle: float

    def __post_init__(self):
        a = float(self.angle)
        if not (0.0 <= a <= math.pi / 2 + 1e-15):
            raise SpecError("rotation angle must lie in [0, pi/2] to be monotone")
        object.__setattr__(self, "angle", a)

    dim = 2

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class NormalCone(Operator):
    set: ConvexSet

    def __post_init__(self):
        if not isinstance(self.set, ConvexSet):
            raise SpecError("normal cone needs a ConvexSet")

    @property
    def dim(self):
        return self.set.dim


@dataclass(frozen=True, eq=False)
class Subdifferential(Operator):
    fn: ConvexFunction

    def __post_init__(self):
        if not isinstance(self.fn, ConvexFunction):
            raise SpecError("subdifferential needs a ConvexFunction")

    @property
    def dim(self):
        return self.fn.dim


@dataclass(frozen=True, eq=False)
class Constant(Operator):
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", _frozen(as_vector(self.z, "z")))

    @property
    def dim(self):
        return self.z.shape[0]


def _need_operator(op):
    if not isinstance(op, Operator):
        raise SpecError(f"expected an Operator spec, got {type(op).__name__}")


@dataclass(frozen=True, eq=False)
class Inverse(Operator):
    inner: Operator

    def __post_init__(self):
        _need_operator(self.inner)

    @property
    def dim(self):
        return self.inner.dim


@dataclass(frozen=True, eq=False)
class Shifted(Operator):
    """``x -> inner(x - argument_shift) - range_shift``."""

    inner: Operator
    range_shift: np.ndarray = None
    argument_shift: np.ndarray = None

    def __post_init__(self):
        _need_operator(self.inner)
        u = None if self.range_shift is None else as_vector(self.range_shift, "range_shift")
        x0 = None if self.argument_shift is None else as_vector(self.argument_shift, "argument_shift")
        d = _merge_dims(self.inner.dim, None if u is None else u.shape[0],
                        None if x0 is None else x0.shape[0])
        if d is None:
            raise DimensionError("shifted operator needs at least one shift vector")
        u = np.zeros(d) if u is None else u
        x0 = np.zeros(d) if x0 is None else x0
        object.__setattr__(self, "range_shift", _frozen(u))
        object.__setattr__(self, "argument_shift", _frozen(x0))

    @property
    def dim(self):
        return self.range_shift.shape[0]


@dataclass(frozen=True, eq=False)
class Scaled(Operator):
    inner: Operator
    factor: float

    def __post_init__(self):
        _need_operator(self.inner)
        a = float(self.factor)
        if not (a > 0 and math.isfinite(a)):
            raise SpecError("scale factor must be positive and finite")
        object.__setattr__(self, "factor", a)

    @property
    def dim(self):
        return self.inner.dim


@dataclass(frozen=True, eq=False)
class Displacement(Operator):
    """``Id - N`` with the nonexpansive ``N = 2 J_inner - Id``."""

    inner: Operator

    def __post_init__(self):
        _need_operator(self.inner)

    @property
    def dim(self):
        return self.inner.dim


# ---------------------------------------------------------------------------
# averages and sampling configuration


@dataclass(frozen=True, eq=False)
class AverageSpec:
    """Operators ``ops`` with weights ``weights`` (summing to one) and parameter ``mu``."""

    ops: Tuple[Operator, ...]
    weights: Tuple[float, ...]
    mu: float = 1.0

    def __post_init__(self):
        ops = tuple(self.ops)
        weights = tuple(self.weights)
        if not ops:
            raise SpecError("an average needs at least one operator")
        if len(ops) != len(weights):
            raise SpecError("one weight per operator")
        for op in ops:
            _need_operator(op)
        for w in weights:
            if not (float(w) > 0):
                raise SpecError("weights must be positive")
        if abs(float(sum(weights)) - 1.0) > WEIGHT_SUM_TOL:
            raise SpecError(f"weights sum to {float(sum(weights))!r}, not 1")
        mu = self.mu
        if not (float(mu) > 0 and math.isfinite(float(mu))):
            raise SpecError("mu must be positive and finite")
        _merge_dims(*(op.dim for op in ops))
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def of(cls, items: Sequence[Tuple[Operator, float]], mu=1.0) -> "AverageSpec":
        return cls(tuple(op for op, _ in items), tuple(w for _, w in items), mu)

    @property
    def items(self):
        return list(zip(self.ops, self.weights))

    @property
    def dim(self):
        return _merge_dims(*(op.dim for op in self.ops))


@dataclass(frozen=True)
class SampleConfig:
    seed: int = 0
    pair_count: int = 1000
    radius: float = 10.0
    tol: float = 1e-10
    max_iter: int = 100_000

    def __post_init__(self):
        if int(self.seed) < 0:
            raise SpecError("seed must be nonnegative")
        if int(self.pair_count) < 1:
            raise SpecError("pair_count must be >= 1")
        if not (self.radius > 0):
            raise SpecError("radius must be positive")
        if not (self.tol > 0):
            raise SpecError("tol must be positive")
        if int(self.max_iter) < 1:
            raise SpecError("max_iter must be >= 1")

    def replace(self, **changes) -> "SampleConfig":
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        kw.update({k: v for k, v in changes.items() if v is not None})
        return SampleConfig(**kw)


# ---------------------------------------------------------------------------
# JSON codec

Spec = Union[ConvexSet, ConvexFunction, Operator]


def _num_out(v: float):
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return float(v)


def _num_in(v, name):
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf"):
            return math.inf
        if s == "-inf":
            return -math.inf
        raise SpecError(f"{name}: unexpected string {v!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"{name}: expected a number, got {v!r}")
    return float(v)


def _vec_out(a):
    return [_num_out(v) for v in np.asarray(a).tolist()]


def _vec_in(v, name):
    if not isinstance(v, list):
        raise SpecError(f"{name}: expected an array")
    return [_num_in(e, name) for e in v]


def _mat_in(v, name):
    if not isinstance(v, list) or not all(isinstance(r, list) for r in v):
        raise SpecError(f"{name}: expected an array of arrays")
    return [_vec_in(r, name) for r in v]


def _ext_in(v, name):
    try:
        return ExtNonneg(v)
    except (TypeError, ValueError, ArithmeticError) as exc:
        raise SpecError(f"{name}: {exc}") from None


def _take(obj: dict, required: Sequence[str], optional: Sequence[str] = ()):
    kind = obj.get("kind")
    extra = set(obj) - {"kind"} - set(required) - set(optional)
    if extra:
        raise SpecError(f"{kind}: unknown fields {sorted(extra)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise SpecError(f"{kind}: missing fields {missing}")
    return [obj[k] for k in required] + [obj.get(k) for k in optional]


def to_json(spec) -> dict:
    """Tagged JSON-ready dict for a set, function, operator or average spec."""
    if isinstance(spec, AverageSpec):
        return {"mu": float(spec.mu),
                "items": [{"weight": float(w), "op": to_json(op)} for op, w in spec.items]}
    if isinstance(spec, Halfspace):
        return {"kind": "halfspace", "normal": _vec_out(spec.normal), "offset": spec.offset}
    if isinstance(spec, Box):
        return {"kind": "box", "lower": _vec_out(spec.lower), "upper": _vec_out(spec.upper)}
    if isinstance(spec, Ball):
        return {"kind": "ball", "center": _vec_out(spec.center), "radius": spec.radius}
    if isinstance(spec, AffineSubspace):
        return {"kind": "affine", "basepoint": _vec_out(spec.basepoint),
                "basis": [_vec_out(r) for r in spec.basis]}
    if isinstance(spec, SinglePoint):
        return {"kind": "point", "p": _vec_out(spec.p)}
    if isinstance(spec, ScaledHalfNormSq):
        return {"kind": "scaled_half_norm_sq", "alpha": spec.alpha.to_json()}
    if isinstance(spec, NormScaled):
        return {"kind": "norm", "c": spec.c}
    if isinstance(spec, Indicator):
        return {"kind": "indicator", "set": to_json(spec.set)}
    if isinstance(spec, LinearTilt):
        return {"kind": "linear_tilt", "base": to_json(spec.base),
                "slope": _vec_out(spec.slope), "shift": _vec_out(spec.shift)}
    if isinstance(spec, Matrix):
        return {"kind": "matrix", "M": [_vec_out(r) for r in spec.M]}
    if isinstance(spec, ScaledIdentity):
        return {"kind": "scaled_identity", "alpha": spec.alpha.to_json()}
    if isinstance(spec, Rotation2D):
        return {"kind": "rotation2d", "angle": spec.angle}
    if isinstance(spec, NormalCone):
        return {"kind": "normal_cone", "set": to_json(spec.set)}
    if isinstance(spec, Subdifferential):
        return {"kind": "subdifferential", "fn": to_json(spec.fn)}
    if isinstance(spec, Constant):
        return {"kind": "constant", "z": _vec_out(spec.z)}
    if isinstance(spec, Inverse):
        return {"kind": "inverse", "inner": to_json(spec.inner)}
    if isinstance(spec, Shifted):
        return {"kind": "shifted", "inner": to_json(spec.inner),
                "range_shift": _vec_out(spec.range_shift),
                "argument_shift": _vec_out(spec.argument_shift)}
    if isinstance(spec, Scaled):
        return {"kind": "scaled", "inner": to_json(spec.inner), "factor": spec.factor}
    if isinstance(spec, Displacement):
        return {"kind": "displacement", "inner": to_json(spec.inner)}
    raise TypeError(f"cannot encode {type(spec).__name__}")


def _set_from_json(obj) -> ConvexSet:
    kind = obj.get("kind")
    if kind == "halfspace":
        a, b = _take(obj, ["normal", "offset"])
        return Halfspace(_vec_in(a, "normal"), _num_in(b, "offset"))
    if kind == "box":
        lo, hi = _take(obj, ["lower", "upper"])
        return Box(_vec_in(lo, "lower"), _vec_in(hi, "upper"))
    if kind == "ball":
        c, r = _take(obj, ["center", "radius"])
        return Ball(_vec_in(c, "center"), _num_in(r, "radius"))
    if kind == "affine":
        p, b = _take(obj, ["basepoint"], ["basis"])
        return AffineSubspace(_vec_in(p, "basepoint"), None if b is None else _mat_in(b, "basis"))
    if kind == "point":
        (p,) = _take(obj, ["p"])
        return SinglePoint(_vec_in(p, "p"))
    raise SpecError(f"unknown set kind {kind!r}")


def _fn_from_json(obj) -> ConvexFunction:
    kind = obj.get("kind")
    if kind == "scaled_half_norm_sq":
        (a,) = _take(obj, ["alpha"])
        return ScaledHalfNormSq(_ext_in(a, "alpha"))
    if kind == "norm":
        (c,) = _take(obj, ["c"])
        return NormScaled(_num_in(c, "c"))
    if kind == "indicator":
        (s,) = _take(obj, ["set"])
        return Indicator(_set_from_json(_need_obj(s)))
    if kind == "linear_tilt":
        base, slope, shift = _take(obj, ["base", "slope"], ["shift"])
        return LinearTilt(_fn_from_json(_need_obj(base)), _vec_in(slope, "slope"),
                          None if shift is None else _vec_in(shift, "shift"))
    raise SpecError(f"unknown function kind {kind!r}")


def _op_from_json(obj) -> Operator:
    kind = obj.get("kind")
    if kind == "matrix":
        (m,) = _take(obj, ["M"])
        return Matrix(_mat_in(m, "M"))
    if kind == "scaled_identity":
        (a,) = _take(obj, ["alpha"])
        return ScaledIdentity(_ext_in(a, "alpha"))
    if kind == "rotation2d":
        (a,) = _take(obj, ["angle"])
        return Rotation2D(_num_in(a, "angle"))
    if kind == "normal_cone":
        (s,) = _take(obj, ["set"])
        return NormalCone(_set_from_json(_need_obj(s)))
    if kind == "subdifferential":
        (f,) = _take(obj, ["fn"])
        return Subdifferential(_fn_from_json(_need_obj(f)))
    if kind == "constant":
        (z,) = _take(obj, ["z"])
        return Constant(_vec_in(z, "z"))
    if kind == "inverse":
        (inner,) = _take(obj, ["inner"])
        return Inverse(_op_from_json(_need_obj(inner)))
    if kind == "shifted":
        inner, u, x0 = _take(obj, ["inner"], ["range_shift", "argument_shift"])
        return Shifted(_op_from_json(_need_obj(inner)),
                       None if u is None else _vec_in(u, "range_shift"),
                       None if x0 is None else _vec_in(x0, "argument_shift"))
    if kind == "scaled":
        inner, a = _take(obj, ["inner", "factor"])
        return Scaled(_op_from_json(_need_obj(inner)), _num_in(a, "factor"))
    if kind == "displacement":
        (inner,) = _take(obj, ["inner"])
        return Displacement(_op_from_json(_need_obj(inner)))
    raise SpecError(f"unknown operator kind {kind!r}")


def _need_obj(obj):
    if not isinstance(obj, dict):
        raise SpecError(f"expected a JSON object, got {type(obj).__name__}")
    return obj


def _weight_in(v):
    w = _num_in(v, "weight")
    return w


def average_from_json(obj) -> AverageSpec:
    _need_obj(obj)
    extra = set(obj) - {"mu", "items"}
    if extra:
        raise SpecError(f"average: unknown fields {sorted(extra)}")
    if "items" not in obj:
        raise SpecError("average: missing field 'items'")
    mu = _num_in(obj.get("mu", 1.0), "mu")
    ops, weights = [], []
    for item in obj["items"]:
        _need_obj(item)
        if set(item) != {"weight", "op"}:
            raise SpecError("average item needs exactly 'weight' and 'op'")
        ops.append(_op_from_json(_need_obj(item["op"])))
        weights.append(_weight_in(item["weight"]))
    return AverageSpec(tuple(ops), tuple(weights), mu)


def from_json(obj, expect: str = "operator"):
    """Decode a spec. ``expect`` is one of operator, function, set, average."""
    _need_obj(obj)
    if expect == "average":
        return average_from_json(obj)
    if "kind" not in obj:
        raise SpecError("spec object needs a 'kind' field")
    if expect == "operator":
        return _op_from_json(obj)
    if expect == "function":
        return _fn_from_json(obj)
    if expect == "set":
        return _set_from_json(obj)
    raise ValueError(f"unknown spec family {expect!r}")


def operator_or_average_from_json(obj):
    _need_obj(obj)
    if "items" in obj:
        return average_from_json(obj)
    return _op_from_json(obj)

"""Regression gallery of worked examples.

Every entry recomputes one example and is compared with the expected value
stored in ``data/gallery_golden.json``. Expected numbers may be written as
exact ``"p/q"`` strings; numeric values match when they lie within the
entry's tolerance, strings and verdicts must match exactly.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from importlib import resources
from typing import Callable, Dict, List

import numpy as np

from . import analysis, averaging, proximal, pythagorean
from .extended import ExtNonneg
from .operators import project, resolve
from .results import jsonable
from .specs import (
    AffineSubspace,
    AverageSpec,
    Indicator,
    Inverse,
    Matrix,
    NormalCone,
    NormScaled,
    Rotation2D,
    SampleConfig,
    ScaledHalfNormSq,
    ScaledIdentity,
    Subdifferential,
    Box,
)

QUARTER = math.pi / 2
ROT = np.array([[0.0, -1.0], [1.0, 0.0]])


def _axis(i):
    e = np.zeros(2)
    e[i] = 1.0
    return AffineSubspace(np.zeros(2), [e])


def _axes_average(lam):
    return AverageSpec((NormalCone(_axis(0)), NormalCone(_axis(1))), (lam, 1 - lam))


def _matrix(avg, d=2):
    M, _ = averaging.resolvent_average_affine(avg, d)
    return M


def _scaled_rotations(alpha):
    A = np.array([[0.0, -alpha], [alpha, 0.0]])
    return AverageSpec((Matrix(A), Matrix(A.T)), (0.5, 0.5))


def _pararec():
    return AverageSpec((NormalCone(_axis(0)), Rotation2D(QUARTER)), (0.5, 0.5))


def _cyclic_matrix():
    return averaging.resolvent_average_matrix([np.eye(2), ROT], [1 / 3, 2 / 3])


def _pair_average(a, b):
    return AverageSpec((ScaledIdentity(a), ScaledIdentity(b)), (0.5, 0.5))


def _ext(v: ExtNonneg):
    return v.to_json()


def _entries(cfg: SampleConfig) -> Dict[str, Callable[[], object]]:
    half = Fraction(1, 2)
    nonpos = Indicator(Box([-math.inf], [0.0]))
    nonneg = Indicator(Box([0.0], [math.inf]))
    return {
        "resolve-quarter-turn": lambda: resolve(Rotation2D(QUARTER), 1.0, [1.0, 0.0]),
        "prox-norm-inside": lambda: resolve(Subdifferential(NormScaled(1.0)), 1.0, [0.3, 0.4]),
        "prox-norm-outside": lambda: resolve(Subdifferential(NormScaled(1.0)), 1.0, [3.0, 4.0]),
        "project-horizontal-axis": lambda: project(_axis(0), [2.0, -7.0]),
        "averaged-resolvent-axes": lambda: averaging.averaged_resolvent(_axes_average(0.25), [2.0, 4.0]),
        "average-identity-quarter-turn": _cyclic_matrix,
        "average-projection-quarter-turn": lambda: _matrix(_pararec()),
        "paramonotone-average-projection-quarter-turn":
            lambda: analysis.check_paramonotone_matrix(_matrix(_pararec())).verdict,
        "paramonotone-quarter-turn": lambda: analysis.check_paramonotone_matrix(ROT).verdict,
        "average-scaled-rotations": lambda: _matrix(_scaled_rotations(2.0)),
        "evaluate-scaled-rotations": lambda: averaging.evaluate_average(_scaled_rotations(2.0), [1.0, 1.0], cfg),
        "evaluate-self-inverse": lambda: averaging.evaluate_average(
            AverageSpec((Rotation2D(QUARTER), Inverse(Rotation2D(QUARTER))), (0.5, 0.5)), [1.0, 2.0], cfg),
        "average-axes-normal-cones": lambda: [_matrix(_axes_average(l)) for l in (0.25, 0.5, 0.75)],
        "average-axis-projections": lambda: [
            averaging.resolvent_average_matrix([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], [l, 1 - l])
            for l in (0.25, 0.5, 0.75)],
        "average-scaled-identities": lambda: _matrix(_pair_average(2.0, 5.0)),
        "r-average-2-5": lambda: _ext(averaging.r_mu([2, 5], [half, half])),
        "r-inverse-2-5": lambda: [
            _ext(averaging.r_mu([2, 5], [half, half]).inv()),
            _ext(averaging.r_mu([ExtNonneg(2).inv(), ExtNonneg(5).inv()], [half, half], 1))],
        "triple-rational-1-2": lambda: _triple_json(*pythagorean.rotation_average_rational(1, 2)),
        "triple-rational-1-q": lambda: [
            list(pythagorean.rotation_average_rational(1, q)[1].as_tuple()) for q in range(2, 6)],
        "triple-euclid-1-2": lambda: list(pythagorean.euclid_triple(1, 2).as_tuple()),
        "prox-average-quadratics": lambda: proximal.proximal_average_value(
            [ScaledHalfNormSq(2), ScaledHalfNormSq(5)], [0.5, 0.5], 1.0, [1.0, 2.0], cfg),
        "prox-average-self-conjugate": lambda: [
            proximal.proximal_average_value([nonpos, nonneg], [0.5, 0.5], 1.0, [t], cfg)
            for t in (-2.0, -1.0, 0.0, 1.0, 2.0)],
        "prox-average-at-zero": lambda: proximal.proximal_average_value(
            [NormScaled(1.0), ScaledHalfNormSq(2)], [0.5, 0.5], 1.0, [0.0], cfg),
        "conjugate-quadratic": lambda: proximal.conjugate_value(ScaledHalfNormSq(2), [3.0]),
        "modulus-average-quadratic": lambda: proximal.modulus_average([2, 5], [0.5, 0.5], 1.0, 1.0),
        "modulus-scaled-rotations": lambda: analysis.estimate_monotonicity_modulus(
            _scaled_rotations(2.0), cfg).statistic,
        "lipschitz-scaled-rotations": lambda: analysis.estimate_lipschitz(_scaled_rotations(2.0), cfg).statistic,
        "modulus-scaled-identities": lambda: analysis.estimate_monotonicity_modulus(
            _pair_average(2.0, 5.0), cfg, dim=2).statistic,
        "cyclic-sum-corner-tuple": lambda: analysis.cyclic_sum(
            [(x, _cyclic_matrix() @ x) for x in (np.zeros(2), np.eye(2)[0], np.eye(2)[1])]),
        "k-cyclic-identity-quarter-turn": lambda: analysis.check_k_cyclic(_cyclic_matrix(), 3, cfg).verdict,
        "k-cyclic-quarter-turn": lambda: [
            analysis.check_k_cyclic(Rotation2D(QUARTER), k, cfg).verdict for k in (2, 3)],
    }


def _triple_json(matrix, triple):
    return {"triple": list(triple.as_tuple()), "matrix": matrix.to_json()}


def load_golden() -> dict:
    text = resources.files("resavg").joinpath("data/gallery_golden.json").read_text()
    return json.loads(text)


def _expected_number(e):
    if isinstance(e, str):
        if e in ("inf", "-inf"):
            return float(e)
        return float(Fraction(e))
    return float(e)


def matches(value, expected, tol: float) -> bool:
    """Structural comparison; numbers within ``tol``, everything else exactly."""
    if isinstance(value, list) or isinstance(expected, list):
        return (isinstance(value, list) and isinstance(expected, list) and len(value) == len(expected)
                and all(matches(v, e, tol) for v, e in zip(value, expected)))
    if isinstance(value, dict) or isinstance(expected, dict):
        return (isinstance(value, dict) and isinstance(expected, dict) and value.keys() == expected.keys()
                and all(matches(value[k], expected[k], tol) for k in value))
    if isinstance(value, bool) or isinstance(expected, bool):
        return value is expected
    if isinstance(value, str):
        return value == expected
    if isinstance(value, (int, float)):
        try:
            e = _expected_number(expected)
        except (TypeError, ValueError, ZeroDivisionError):
            return False
        if math.isinf(value) or math.isinf(e):
            return value == e
        return abs(value - e) <= tol
    return value == expected


def run_gallery(cfg: SampleConfig = None) -> dict:
    """Recompute every entry; the report is deterministic for a fixed ``cfg``."""
    cfg = cfg or SampleConfig()
    golden = load_golden()["entries"]
    entries = _entries(cfg)
    missing = sorted(set(golden) ^ set(entries))
    if missing:
        raise KeyError(f"gallery entries and goldens disagree on {missing}")
    rows: List[dict] = []
    for name in sorted(entries):
        value = jsonable(entries[name]())
        g = golden[name]
        ok = matches(value, g["expected"], g["tol"])
        rows.append({"id": name, "value": value, "expected": g["expected"], "tol": g["tol"], "match": ok})
    return {
        "seed": cfg.seed,
        "entries": rows,
        "mismatches": [r["id"] for r in rows if not r["match"]],
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"

import json
import math

import numpy as np
import pytest

from resavg.extended import ExtNonneg
from resavg.specs import (
    AffineSubspace,
    AverageSpec,
    Ball,
    Box,
    Constant,
    DimensionError,
    Displacement,
    Halfspace,
    Indicator,
    Inverse,
    LinearTilt,
    Matrix,
    NormalCone,
    NormScaled,
    Rotation2D,
    SampleConfig,
    Scaled,
    ScaledHalfNormSq,
    ScaledIdentity,
    Shifted,
    SinglePoint,
    SpecError,
    Subdifferential,
    average_from_json,
    from_json,
    operator_or_average_from_json,
    to_json,
)


def test_matrix_monotonicity_threshold():
    Matrix([[0, -1], [1, 0]])
    Matrix([[1e-13 * 0, 0], [0, -5e-13]])
    with pytest.raises(SpecError):
        Matrix([[-1e-6, 0], [0, 1]])
    with pytest.raises(SpecError):
        Matrix([[1, 0, 0], [0, 1, 0]])


def test_non_finite_entries_rejected():
    with pytest.raises(SpecError):
        Matrix([[math.nan, 0], [0, 1]])
    with pytest.raises(SpecError):
        Constant([1.0, math.inf])


def test_rotation_angle_range():
    Rotation2D(0.0)
    Rotation2D(math.pi / 2)
    with pytest.raises(SpecError):
        Rotation2D(2.0)


def test_set_invariants():
    with pytest.raises(SpecError):
        Ball([0, 0], 0.0)
    with pytest.raises(SpecError):
        Box([1, 0], [0, 1])
    with pytest.raises(SpecError):
        Halfspace([0, 0], 1.0)
    Box([-math.inf, 0], [0, math.inf])


def test_affine_basis_is_orthonormalized():
    a = AffineSubspace([0, 0, 0], [[2, 0, 0], [1, 1, 0]])
    assert np.allclose(a.basis @ a.basis.T, np.eye(2))


def test_average_weights_must_sum_to_one():
    with pytest.raises(SpecError):
        AverageSpec((ScaledIdentity(1), ScaledIdentity(2)), (0.5, 0.6))
    with pytest.raises(SpecError):
        AverageSpec((ScaledIdentity(1),), (0.0,))
    AverageSpec((ScaledIdentity(1), ScaledIdentity(2)), (0.5, 0.5 + 5e-10))


def test_average_dimensions_must_agree():
    with pytest.raises(DimensionError):
        AverageSpec((Matrix(np.eye(2)), Matrix(np.eye(3))), (0.5, 0.5))


def test_sample_config_validation():
    with pytest.raises(SpecError):
        SampleConfig(tol=0)
    with pytest.raises(SpecError):
        SampleConfig(pair_count=0)
    assert SampleConfig().replace(seed=3, tol=None).seed == 3


def test_arrays_are_read_only():
    m = Matrix([[1.0, 0], [0, 1]])
    with pytest.raises(ValueError):
        m.M[0, 0] = 5


ALL_SPECS = [
    Matrix([[1, 2], [-2, 0]]),
    ScaledIdentity("inf"),
    ScaledIdentity(0.5),
    Rotation2D(0.3),
    NormalCone(Halfspace([0, 1], 0.0)),
    NormalCone(Box([0, -math.inf], [1, 2])),
    NormalCone(Ball([1, 1], 2.0)),
    NormalCone(AffineSubspace([0, 1], [[1, 0]])),
    NormalCone(SinglePoint([1, 2])),
    Subdifferential(ScaledHalfNormSq(2)),
    Subdifferential(NormScaled(1.5)),
    Subdifferential(Indicator(Ball([0, 0], 1.0))),
    Subdifferential(LinearTilt(NormScaled(1.0), [1, 0], [0, 1])),
    Constant([1, -1]),
    Inverse(Rotation2D(1.0)),
    Shifted(Matrix(np.eye(2)), [1, 2], [3, 4]),
    Scaled(Rotation2D(1.0), 2.0),
    Displacement(NormalCone(Ball([0, 0], 1.0))),
]


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: type(s).__name__)
def test_operator_json_round_trip(spec):
    obj = to_json(spec)
    text = json.dumps(obj)
    again = from_json(json.loads(text))
    assert to_json(again) == obj


def test_infinity_encoded_as_string():
    obj = to_json(NormalCone(Box([0, -math.inf], [1, 2])))
    assert obj["set"]["lower"] == [0.0, "-inf"]
    assert to_json(ScaledIdentity("inf"))["alpha"] == "inf"


def test_average_json_round_trip():
    avg = AverageSpec((Matrix(np.eye(2)), Rotation2D(math.pi / 2)), (1 / 3, 2 / 3), 2.0)
    obj = to_json(avg)
    assert set(obj) == {"mu", "items"}
    back = average_from_json(obj)
    assert back.mu == 2.0 and to_json(back) == obj
    assert isinstance(operator_or_average_from_json(obj), AverageSpec)


@pytest.mark.parametrize("obj", [
    {"kind": "matrix", "M": [[1, 0], [0, 1]], "extra": 1},
    {"kind": "nope"},
    {"kind": "matrix"},
    {"kind": "rotation2d", "angle": "wide"},
    {"kind": "scaled_identity", "alpha": -1},
])
def test_invalid_operator_json(obj):
    with pytest.raises(SpecError):
        from_json(obj)


def test_unknown_average_fields_rejected():
    with pytest.raises(SpecError):
        average_from_json({"mu": 1, "items": [], "lambda": 3})
    with pytest.raises(SpecError):
        average_from_json({"items": [{"weight": 1, "op": {"kind": "scaled_identity", "alpha": 1}, "x": 0}]})


def test_function_and_set_json():
    f = LinearTilt(ScaledHalfNormSq(ExtNonneg("inf")), [1.0], [2.0])
    assert to_json(from_json(to_json(f), "function")) == to_json(f)
    s = AffineSubspace([0, 0], [[0, 1]])
    assert to_json(from_json(to_json(s), "set")) == to_json(s)

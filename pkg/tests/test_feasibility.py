import json

import numpy as np
import pytest

from helpers import random_monotone
from resavg.feasibility import operator_residuals, solve_common_value, solve_common_zero
from resavg.operators import contains
from resavg.specs import (
    AverageSpec,
    Box,
    Constant,
    DimensionError,
    Indicator,
    Inverse,
    Matrix,
    NormalCone,
    SampleConfig,
    ScaledIdentity,
    Shifted,
    SinglePoint,
    Subdifferential,
)

BOXES = AverageSpec(
    (NormalCone(Box([0.0, 0.0], [2.0, 2.0])), NormalCone(Box([1.0, 1.0], [3.0, 3.0]))), (0.5, 0.5))
CFG = SampleConfig(tol=1e-10, max_iter=10_000)


def test_overlapping_boxes():
    x, trace = solve_common_zero(BOXES, [5.0, -5.0], CFG)
    assert trace.converged and not trace.stalled
    # the iterates approach from outside, so membership holds up to the solver tolerance
    assert contains(Box([1.0, 1.0], [2.0, 2.0]), x, tol=1e-8)
    assert max(trace.operator_residuals) <= 1e-8
    assert trace.common(1e-8)
    assert trace.iterations <= 10_000


def test_fejer_monotone_towards_a_common_zero():
    x_star, _ = solve_common_zero(BOXES, [5.0, -5.0], CFG)
    _, trace = solve_common_zero(BOXES, [-4.0, 7.0], SampleConfig(tol=1e-10, max_iter=50))
    dist = [np.linalg.norm(it - x_star) for it in trace.iterates]
    assert all(b <= a + 1e-9 for a, b in zip(dist, dist[1:]))


def test_limit_is_fixed_by_every_resolvent(rng):
    for _ in range(5):
        x0 = rng.uniform(-10, 10, 2)
        x, trace = solve_common_zero(BOXES, x0, CFG)
        assert trace.converged
        assert all(r <= 10 * CFG.tol for r in operator_residuals(BOXES, x))


def test_single_invertible_matrix(rng):
    M = random_monotone(rng, 2) + np.eye(2)
    x_star = np.array([1.0, -2.0])
    # shift so that the zero sits at x_star
    avg = AverageSpec((Shifted(Matrix(M), argument_shift=x_star),), (1.0,))
    x, trace = solve_common_zero(avg, [0.0, 0.0], CFG)
    assert trace.converged and np.allclose(x, x_star, atol=1e-8)


def test_identity_and_its_inverse_halve_each_step():
    avg = AverageSpec((ScaledIdentity(1.0), Inverse(ScaledIdentity(1.0))), (0.5, 0.5))
    x, trace = solve_common_zero(avg, [4.0, -8.0], SampleConfig(tol=1e-10, max_iter=500))
    assert trace.thinning == 1 and np.allclose(trace.iterates[1], [2.0, -4.0])
    assert trace.converged and np.linalg.norm(x) <= 1e-9


def test_common_value_with_matrices(rng):
    # M1 x = M2 x = u share the solution x_sol
    x_sol = np.array([0.5, 1.5])
    M1 = random_monotone(rng, 2) + np.eye(2)
    M2 = random_monotone(rng, 2) + np.eye(2)
    M2 = M2 + np.outer(M1 @ x_sol - M2 @ x_sol, x_sol) / (x_sol @ x_sol)
    u = M1 @ x_sol
    assert np.allclose(M2 @ x_sol, u)
    if np.min(np.linalg.eigvalsh(M2 + M2.T)) < 0:
        pytest.skip("adjusted matrix left the monotone cone")
    avg = AverageSpec((Matrix(M1), Matrix(M2)), (0.4, 0.6))
    x, trace = solve_common_value(avg, u, [0.0, 0.0], CFG)
    assert trace.converged and np.allclose(x, x_sol, atol=1e-7)


def test_common_value_zero_is_common_zero():
    a, ta = solve_common_zero(BOXES, [5.0, -5.0], CFG)
    b, tb = solve_common_value(BOXES, [0.0, 0.0], [5.0, -5.0], CFG)
    assert np.allclose(a, b) and ta.iterations == tb.iterations


def test_disjoint_singletons_fail_the_per_operator_check():
    avg = AverageSpec((NormalCone(SinglePoint([0.0, 0.0])), NormalCone(SinglePoint([2.0, 0.0]))), (0.5, 0.5))
    x, trace = solve_common_zero(avg, [5.0, 5.0], CFG)
    assert np.allclose(x, [1.0, 0.0])
    assert not trace.common(1e-8)


def test_disjoint_boxes_fixed_point_is_not_common():
    avg = AverageSpec((NormalCone(Box([0.0], [1.0])), Subdifferential(Indicator(Box([2.0], [3.0])))), (0.5, 0.5))
    x, trace = solve_common_zero(avg, [10.0], CFG)
    assert trace.converged and not trace.common(1e-6)


def test_budget_exhaustion():
    _, trace = solve_common_zero(BOXES, [5.0, -5.0], SampleConfig(tol=1e-10, max_iter=3))
    assert not trace.converged and trace.iterations == 3


def test_trace_export():
    _, trace = solve_common_zero(BOXES, [5.0, -5.0], CFG)
    lines = trace.jsonl().splitlines()
    assert len(lines) == len(trace.residuals)
    first = json.loads(lines[0])
    assert first["k"] == 1 and first["residual"] == trace.residuals[0]
    assert trace.summary()["converged"] is True


def test_translation_stalls_and_is_thinned():
    # the resolvent of a nonzero constant is a translation: no fixed point, constant step
    avg = AverageSpec((Constant([1.0]),), (1.0,))
    _, trace = solve_common_zero(avg, [0.0], SampleConfig(tol=1e-10, max_iter=5000))
    assert trace.stalled and not trace.converged
    assert trace.iterations == 1001
    assert trace.thinning == 5 and len(trace.iterates) == 1 + 1001 // 5 + 1


def test_dimension_check():
    with pytest.raises(DimensionError):
        solve_common_zero(BOXES, [1.0, 2.0, 3.0], CFG)

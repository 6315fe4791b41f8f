import itertools
import math

import numpy as np
import pytest

from helpers import random_monotone
from resavg.analysis import (
    GraphSampler,
    Reflection,
    Resolvent,
    check_banach_contraction,
    check_disjoint_injectivity,
    check_firmly_nonexpansive,
    check_fitzpatrick_inequality,
    check_k_cyclic,
    check_nonexpansive,
    check_paramonotone_matrix,
    cyclic_sum,
    estimate_cocoercivity,
    estimate_lipschitz,
    estimate_monotonicity_modulus,
    fitzpatrick_matrix,
    n_probes,
    numerical_rank,
    sample_points,
    witness_statistic,
)
from resavg.averaging import resolvent_average_matrix
from resavg.results import FAIL, INCONCLUSIVE, PASS
from resavg.specs import (
    AffineSubspace,
    AverageSpec,
    Matrix,
    NormalCone,
    NormScaled,
    Rotation2D,
    SampleConfig,
    ScaledIdentity,
    SpecError,
    Subdifferential,
)

CFG = SampleConfig(pair_count=300)
ROT = np.array([[0.0, -1.0], [1.0, 0.0]])
CYCLIC = np.array([[5.0, -12.0], [12.0, 5.0]]) / 13
X_AXIS = AffineSubspace([0.0, 0.0], [[1.0, 0.0]])
Y_AXIS = AffineSubspace([0.0, 0.0], [[0.0, 1.0]])


def test_sample_points_are_deterministic():
    a = sample_points(3, CFG)
    assert np.array_equal(a, sample_points(3, CFG))
    assert len(a) == n_probes(3) + CFG.pair_count
    assert np.all(np.linalg.norm(a, axis=1) <= CFG.radius + 1e-12)
    assert not np.array_equal(a, sample_points(3, SampleConfig(pair_count=300, seed=1)))


def test_graph_sampler_points_are_on_the_graph():
    avg = AverageSpec((Subdifferential(NormScaled(1.0)), Matrix(ROT)), (0.5, 0.5), 2.0)
    s = GraphSampler(avg, CFG)
    x, u = s.point([1.0, 2.0])
    assert np.allclose(s.resolvent(x + 2.0 * u), x)


# --- constants ------------------------------------------------------------


def _matrix_constants(M):
    # oracle: exact constants of a linear operator
    sym = (M + M.T) / 2
    mono = float(np.min(np.linalg.eigvalsh(sym)))
    lip = float(np.linalg.norm(M, 2))
    return mono, lip


def test_matrix_constants_against_exact_values(rng):
    for _ in range(5):
        M = random_monotone(rng, 2) + 0.5 * np.eye(2)
        mono, lip = _matrix_constants(M)
        est_m = estimate_monotonicity_modulus(M, CFG).statistic
        est_l = estimate_lipschitz(M, CFG).statistic
        # sampled estimates bracket the truth from the safe side
        assert mono - 1e-12 <= est_m <= mono + 0.05 * abs(mono) + 0.02
        assert lip - 0.05 * lip - 0.02 <= est_l <= lip + 1e-12


def test_scaled_rotation_average_constants():
    A = np.array([[0.0, -2.0], [2.0, 0.0]])
    avg = AverageSpec((Matrix(A), Matrix(A.T)), (0.5, 0.5))
    assert abs(estimate_lipschitz(avg, CFG).statistic - 4) <= 0.01
    assert abs(estimate_monotonicity_modulus(avg, CFG).statistic - 4) <= 0.01


def test_monotonicity_bound_verdicts():
    assert estimate_monotonicity_modulus(2 * np.eye(2), CFG, bound=2.0).verdict == PASS
    res = estimate_monotonicity_modulus(2 * np.eye(2), CFG, bound=2.5)
    assert res.verdict == FAIL
    assert witness_statistic("monotone", res.witness) == pytest.approx(res.statistic)


def test_lipschitz_of_subdifferential():
    # unbounded near the origin, but uniform samples only see part of that
    res = estimate_lipschitz(Subdifferential(NormScaled(1.0)), CFG, bound=1.0, dim=2)
    assert res.verdict == FAIL and res.statistic > 1.0
    assert witness_statistic("lipschitz", res.witness) == pytest.approx(res.statistic)


def test_cocoercivity():
    assert estimate_cocoercivity(2 * np.eye(2), CFG).statistic == pytest.approx(0.5)
    assert estimate_cocoercivity(ROT, CFG).verdict == FAIL
    # the quarter turn is monotone but has cocoercivity constant 0
    res = estimate_cocoercivity(Rotation2D(math.pi / 2), CFG)
    assert res.verdict == FAIL and abs(res.statistic) <= 1e-12


def test_inconclusive_without_enough_pairs():
    res = estimate_cocoercivity(np.zeros((2, 2)), CFG)
    assert res.verdict == INCONCLUSIVE and res.witness is None


def test_dimension_needed_for_dimensionless_operators():
    with pytest.raises(SpecError):
        estimate_lipschitz(ScaledIdentity(2.0), CFG)
    assert estimate_lipschitz(ScaledIdentity(2.0), CFG, dim=3).statistic == pytest.approx(2.0)


# --- maps -----------------------------------------------------------------


@pytest.mark.parametrize("op", [Rotation2D(0.7), Subdifferential(NormScaled(1.0)), NormalCone(X_AXIS)])
def test_resolvents_are_firmly_nonexpansive(op):
    assert check_firmly_nonexpansive(op, CFG, dim=2).verdict == PASS
    assert check_nonexpansive(Reflection(op), CFG, dim=2).verdict == PASS


def test_non_firm_map_fails_with_replayable_witness():
    res = check_firmly_nonexpansive(-np.eye(2), CFG)
    assert res.verdict == FAIL
    assert witness_statistic("firmly-nonexpansive", res.witness) == pytest.approx(res.statistic)
    assert check_nonexpansive(2 * np.eye(2), CFG).verdict == FAIL


def test_resolvent_wrapper():
    assert np.allclose(Resolvent(Rotation2D(math.pi / 2))([1.0, 0.0]), [0.5, -0.5])


def test_banach_contraction():
    avg = AverageSpec((ScaledIdentity(0.5), Rotation2D(math.pi / 2)), (0.5, 0.5))
    res = check_banach_contraction(avg, CFG, dim=2)
    assert res.verdict == PASS and res.statistic < 1
    assert check_banach_contraction(ROT, CFG).verdict == FAIL


def test_disjoint_injectivity():
    avg = AverageSpec((NormalCone(X_AXIS), Subdifferential(NormScaled(0.0))), (0.5, 0.5))
    assert check_disjoint_injectivity(Rotation2D(0.3), CFG).verdict == PASS
    res = check_disjoint_injectivity(NormalCone(X_AXIS), CFG)
    assert res.verdict == FAIL and res.statistic == pytest.approx(1.0)
    assert witness_statistic("disjoint-injective", res.witness) == pytest.approx(1.0)
    assert check_disjoint_injectivity(avg, CFG).verdict == FAIL


# --- paramonotonicity -----------------------------------------------------


def test_rank_test():
    assert numerical_rank(np.diag([1.0, 1e-14])) == 1
    assert check_paramonotone_matrix(np.eye(2)).verdict == PASS
    assert check_paramonotone_matrix(np.diag([1.0, 0.0])).verdict == PASS
    # symmetric part of rank 1 but the matrix itself is invertible
    assert check_paramonotone_matrix(np.array([[1.0, 1.0], [-1.0, 0.0]])).verdict == FAIL
    res = check_paramonotone_matrix(ROT)
    assert res.verdict == FAIL and res.details["rank"] == 2 and res.details["rank_symmetric_part"] == 0


def test_paramonotone_witness_is_orthogonal_but_not_in_graph():
    M = np.array([[0.0, -1.0], [1.0, 2.0]])
    res = check_paramonotone_matrix(M)
    assert res.verdict == FAIL
    (d, Md), (z, Mz) = (tuple(np.asarray(p) for p in pair) for pair in res.witness)
    assert np.allclose(Md, M @ d) and np.allclose(Mz, M @ z)
    assert abs((Md - Mz) @ (d - z)) <= 1e-12
    assert np.linalg.norm(M @ d) > 1e-6  # (d, 0) is not on the graph


def test_paramonotone_random_rank_deficient(rng):
    for _ in range(20):
        B = rng.normal(size=(3, 1))
        assert check_paramonotone_matrix(B @ B.T).verdict == PASS
        S = rng.normal(size=(3, 3))
        assert check_paramonotone_matrix(B @ B.T + S - S.T).verdict == FAIL


# --- Fitzpatrick ----------------------------------------------------------


def _grid_fitzpatrick(M, x, v, radius=60.0, n=601):
    # oracle: sup over z of <z, M^T x + v> - <z, M z> on a grid, refined once
    b = M.T @ np.asarray(x) + np.asarray(v)
    g = np.linspace(-radius, radius, n)
    Z = np.array(list(itertools.product(g, g)))
    vals = Z @ b - np.einsum("ij,jk,ik->i", Z, M, Z)
    k = int(np.argmax(vals))
    fine = np.linspace(-1, 1, 201) * (g[1] - g[0])
    Z2 = Z[k] + np.array(list(itertools.product(fine, fine)))
    return float(np.max(Z2 @ b - np.einsum("ij,jk,ik->i", Z2, M, Z2))), Z[k]


@pytest.mark.parametrize("M", [np.eye(2), np.diag([1.0, 2.0]), np.array([[1.0, -1.0], [1.0, 1.0]])])
def test_fitzpatrick_matches_grid_oracle(M, rng):
    for _ in range(5):
        x, v = rng.normal(size=2), rng.normal(size=2)
        want, _ = _grid_fitzpatrick(M, x, v)
        assert abs(fitzpatrick_matrix(M, x, v) - want) <= 1e-4


def test_fitzpatrick_infinite_off_range():
    # the quarter turn has zero symmetric part: finite only when M^T x + v = 0
    assert math.isinf(fitzpatrick_matrix(ROT, [1.0, 0.0], [0.0, 0.0]))
    assert fitzpatrick_matrix(ROT, [1.0, 0.0], [0.0, 1.0]) == 0.0
    M = np.diag([1.0, 0.0])
    want, zmax = _grid_fitzpatrick(M, [1.0, 0.0], [0.0, 1.0])
    assert math.isinf(fitzpatrick_matrix(M, [1.0, 0.0], [0.0, 1.0]))
    assert abs(zmax[1]) == 60.0  # the grid sup runs off to the boundary


def test_fitzpatrick_dominates_pairing(rng):
    for _ in range(20):
        M = random_monotone(rng, 3)
        x, v = rng.normal(size=3), rng.normal(size=3)
        assert fitzpatrick_matrix(M, x, v) >= float(x @ v) - 1e-9
        assert fitzpatrick_matrix(M, x, M @ x) == pytest.approx(float(x @ M @ x), abs=1e-8)


@pytest.mark.parametrize("pair", [(np.eye(2), ROT), (np.diag([1.0, 2.0]), np.diag([2.0, 1.0]))])
def test_fitzpatrick_inequality_pairs(pair):
    res = check_fitzpatrick_inequality(list(pair), [0.5, 0.5], 1.0, SampleConfig(pair_count=200))
    assert res.verdict == PASS
    assert res.details["finite_rhs_samples"] >= 100


def test_fitzpatrick_inequality_random(rng):
    for _ in range(5):
        mats = [random_monotone(rng, 2, psd_rank=1) for _ in range(2)]
        res = check_fitzpatrick_inequality(mats, [0.3, 0.7], 1.5, SampleConfig(pair_count=100, seed=3))
        assert res.verdict == PASS


# --- cyclic monotonicity --------------------------------------------------


def test_cyclic_sum_corner_tuple():
    pts = [(x, CYCLIC @ x) for x in (np.zeros(2), np.eye(2)[0], np.eye(2)[1])]
    assert cyclic_sum(pts) == pytest.approx(-2 / 13, abs=1e-15)


def test_k_cyclic_counterexample():
    res = check_k_cyclic(CYCLIC, 3, CFG)
    assert res.verdict == FAIL
    assert res.statistic <= -2 / 13 + 1e-12
    assert witness_statistic("k-cyclic", res.witness) == pytest.approx(res.statistic)


def test_k_cyclic_symmetric_passes(rng):
    B = rng.normal(size=(2, 2))
    assert check_k_cyclic(B @ B.T, 3, CFG).verdict == PASS
    assert check_k_cyclic(Subdifferential(NormScaled(1.0)), 4, CFG, dim=2).verdict == PASS


def test_monotone_means_two_cyclic():
    assert check_k_cyclic(Rotation2D(math.pi / 2), 2, CFG).verdict == PASS
    assert check_k_cyclic(Rotation2D(math.pi / 2), 3, CFG).verdict == FAIL


def test_k_must_be_at_least_two():
    with pytest.raises(SpecError):
        check_k_cyclic(np.eye(2), 1)


def test_diagonal_average_dominates_r_mu():
    from resavg.averaging import r_mu
    A, B = np.diag([1.0, 3.0]), np.diag([4.0, 0.5])
    R = resolvent_average_matrix([A, B], [0.5, 0.5])
    est = estimate_monotonicity_modulus(R, CFG).statistic
    assert est >= float(r_mu([1.0, 0.5], [0.5, 0.5])) - 1e-6

"""Sampled and exact property checks for operators, averages and maps.

Graph points of an operator are generated from its resolvent through the
Minty parametrization ``z -> (J z, z - J z)``; for an average the resolvent
``J_{mu R}`` is the averaged resolvent and ``u = (z - J z) / mu``. Sampled
constants are bounds observed on the samples, never certified values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .averaging import averaged_resolvent, evaluate_average, resolvent_average_matrix
from .operators import NotInDomain, evaluate_operator, resolve
from .results import FAIL, INCONCLUSIVE, PASS, CheckResult
from .specs import (
    AverageSpec,
    Operator,
    SampleConfig,
    SpecError,
    as_monotone_matrix,
    as_vector,
)

RANK_RTOL = 1e-9
FITZPATRICK_RTOL = 1e-9
MIN_SEPARATION = 1e-9
MIN_PAIRS = 10
MAX_CORNER_TUPLES = 1000


@dataclass(frozen=True)
class Resolvent:
    """The map ``J_{gamma op}``."""

    op: Operator
    gamma: float = 1.0

    def __call__(self, x):
        return resolve(self.op, self.gamma, x)

    @property
    def dim(self):
        return self.op.dim


@dataclass(frozen=True)
class Reflection:
    """The map ``2 J_{gamma op} - Id``."""

    op: Operator
    gamma: float = 1.0

    def __call__(self, x):
        x = as_vector(x)
        return 2.0 * resolve(self.op, self.gamma, x) - x

    @property
    def dim(self):
        return self.op.dim


Source = Union[Operator, AverageSpec, np.ndarray, Callable]


# ---------------------------------------------------------------------------
# sampling


def sample_points(d: int, cfg: SampleConfig, count: Optional[int] = None) -> np.ndarray:
    """Probes ``0, +-e_i, +-radius e_i`` followed by uniform draws from the ball."""
    rng = np.random.default_rng(cfg.seed)
    eye = np.eye(d)
    probes = [np.zeros(d)]
    for i in range(d):
        probes += [eye[i], -eye[i], cfg.radius * eye[i], -cfg.radius * eye[i]]
    count = cfg.pair_count if count is None else count
    g = rng.standard_normal((count, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = cfg.radius * rng.random(count) ** (1.0 / d)
    return np.vstack([np.array(probes), g * r[:, None]])


def n_probes(d: int) -> int:
    return 1 + 4 * d


def sample_pairs(n_points: int, n_fixed: int, cfg: SampleConfig) -> List[Tuple[int, int]]:
    """All pairs among the first ``n_fixed`` points plus ``cfg.pair_count`` random pairs."""
    pairs = list(itertools.combinations(range(n_fixed), 2))
    target = len(pairs) + cfg.pair_count
    rng = np.random.default_rng(cfg.seed + 1)
    while len(pairs) < target:
        i, j = (int(v) for v in rng.integers(0, n_points, 2))
        if i != j:
            pairs.append((i, j))
    return pairs


def _source_dim(src, dim=None) -> int:
    if dim is not None:
        return int(dim)
    if isinstance(src, np.ndarray):
        return src.shape[0]
    d = getattr(src, "dim", None)
    if d is None:
        raise SpecError("cannot infer the dimension of this source; pass dim=")
    return int(d)


class GraphSampler:
    """Graph points ``(x, u)`` of an operator, an average, a matrix or a map.

    Operators and averages are sampled through their resolvents, so every
    pair is an exact graph point up to rounding. Matrices and callables are
    treated as single-valued operators and evaluated at the sampled points.
    """

    def __init__(self, source: Source, cfg: Optional[SampleConfig] = None, dim: Optional[int] = None):
        self.cfg = cfg or SampleConfig()
        if isinstance(source, (list, tuple)):
            source = np.array(source, dtype=float)
        if isinstance(source, np.ndarray):
            source = as_monotone_matrix(source) if source.shape[0] == source.shape[1] else source
        self.source = source
        self.dim = _source_dim(source, dim)

    def resolvent(self, z):
        src = self.source
        if isinstance(src, AverageSpec):
            return averaged_resolvent(src, z)
        if isinstance(src, Operator):
            return resolve(src, 1.0, z)
        raise TypeError("only operators and averages are sampled through resolvents")

    def point(self, z) -> Tuple[np.ndarray, np.ndarray]:
        src = self.source
        z = as_vector(z)
        if isinstance(src, AverageSpec):
            x = averaged_resolvent(src, z)
            return x, (z - x) / float(src.mu)
        if isinstance(src, Operator):
            x = resolve(src, 1.0, z)
            return x, z - x
        if isinstance(src, np.ndarray):
            return z, src @ z
        return z, as_vector(src(z), "u")

    def graph(self) -> Tuple[np.ndarray, np.ndarray]:
        pts = sample_points(self.dim, self.cfg)
        xs, us = zip(*(self.point(z) for z in pts))
        return np.array(xs), np.array(us)

    def pairs(self) -> List[Tuple[int, int]]:
        return sample_pairs(self.cfg.pair_count + n_probes(self.dim), n_probes(self.dim), self.cfg)


def _evaluate(src, x, cfg):
    if isinstance(src, AverageSpec):
        return evaluate_average(src, x, cfg)
    if isinstance(src, Operator):
        return evaluate_operator(src, x, cfg)
    if isinstance(src, np.ndarray):
        return src @ x
    return as_vector(src(x), "u")


# ---------------------------------------------------------------------------
# pairwise statistics


def _monotone_ratio(p, q):
    (x, u), (y, v) = p, q
    dx = x - y
    return float((u - v) @ dx) / float(dx @ dx)


def _lipschitz_ratio(p, q):
    (x, u), (y, v) = p, q
    return float(np.linalg.norm(u - v)) / float(np.linalg.norm(x - y))


def _cocoercive_ratio(p, q):
    (x, u), (y, v) = p, q
    du = u - v
    return float(du @ (x - y)) / float(du @ du)


def _firm_violation(p, q):
    (x, tx), (y, ty) = p, q
    dx, dt = x - y, tx - ty
    return (float(dt @ dt) - float(dx @ dt)) / float(dx @ dx)


def _nonexpansive_violation(p, q):
    (x, tx), (y, ty) = p, q
    dx, dt = x - y, tx - ty
    return (float(dt @ dt) - float(dx @ dx)) / float(dx @ dx)


def cyclic_sum(points: Sequence[Tuple[np.ndarray, np.ndarray]]) -> float:
    """``sum_i <u_i, x_i - x_{i+1}>`` with indices taken cyclically."""
    k = len(points)
    return float(sum(points[i][1] @ (points[i][0] - points[(i + 1) % k][0]) for i in range(k)))


_PAIR_STATS = {
    "monotone": _monotone_ratio,
    "lipschitz": _lipschitz_ratio,
    "cocoercive": _cocoercive_ratio,
    "firmly-nonexpansive": _firm_violation,
    "nonexpansive": _nonexpansive_violation,
    "disjoint-injective": _lipschitz_ratio,
    "banach-contraction": _lipschitz_ratio,
}


def witness_statistic(prop: str, witness) -> float:
    """Recompute the statistic a check reported from its witness alone."""
    pts = [(as_vector(a), as_vector(b, "u")) for a, b in witness]
    if prop == "k-cyclic":
        return cyclic_sum(pts)
    if prop == "paramonotone":
        (x, u), (y, v) = pts
        # the pair is orthogonal yet (x, v) is not a graph point: report |u - v|
        return float(np.linalg.norm(u - v))
    return _PAIR_STATS[prop](pts[0], pts[1])


def _pair_scan(xs, us, pairs, stat, worst, skip):
    best, arg, used = None, None, 0
    for i, j in pairs:
        if skip(i, j):
            continue
        s = stat((xs[i], us[i]), (xs[j], us[j]))
        used += 1
        if best is None or worst(s, best):
            best, arg = s, (i, j)
    return best, arg, used


def _witness(xs, us, arg):
    i, j = arg
    return [[xs[i], us[i]], [xs[j], us[j]]]


def _graph_check(src, cfg, dim, stat, worst, skip_on, passes, prop):
    cfg = cfg or SampleConfig()
    sampler = GraphSampler(src, cfg, dim)
    xs, us = sampler.graph()
    pairs = sampler.pairs()
    if skip_on == "x":
        skip = lambda i, j: np.linalg.norm(xs[i] - xs[j]) < MIN_SEPARATION
    else:
        skip = lambda i, j: np.linalg.norm(us[i] - us[j]) < MIN_SEPARATION
    best, arg, used = _pair_scan(xs, us, pairs, stat, worst, skip)
    details = {"property": prop}
    if used < MIN_PAIRS:
        return CheckResult(INCONCLUSIVE, math.nan if best is None else best, None, used, cfg.seed, details)
    ok = passes(best)
    return CheckResult(PASS if ok else FAIL, best, _witness(xs, us, arg), used, cfg.seed, details)


def estimate_monotonicity_modulus(src: Source, cfg: Optional[SampleConfig] = None,
                                  bound: Optional[float] = None, dim=None) -> CheckResult:
    """Smallest ``<u - v, x - y> / ||x - y||^2`` over sampled graph pairs.

    Passes when the statistic is at least ``-tol`` (monotone), or at least
    ``bound - tol`` when a claimed modulus ``bound`` is given.
    """
    cfg = cfg or SampleConfig()
    target = 0.0 if bound is None else float(bound)
    return _graph_check(src, cfg, dim, _monotone_ratio, lambda a, b: a < b, "x",
                        lambda s: s >= target - cfg.tol * max(1.0, abs(target)), "monotone")


def estimate_lipschitz(src: Source, cfg: Optional[SampleConfig] = None,
                       bound: Optional[float] = None, dim=None) -> CheckResult:
    """Largest ``||u - v|| / ||x - y||`` over sampled graph pairs.

    Without ``bound`` the verdict is pass whenever enough pairs were
    usable (the statistic is then the sampled estimate); with ``bound`` it
    passes iff the statistic is at most ``bound + tol``.
    """
    cfg = cfg or SampleConfig()
    if bound is None:
        passes = lambda s: True
    else:
        passes = lambda s: s <= float(bound) + cfg.tol * max(1.0, abs(float(bound)))
    return _graph_check(src, cfg, dim, _lipschitz_ratio, lambda a, b: a > b, "x", passes, "lipschitz")


def estimate_cocoercivity(src: Source, cfg: Optional[SampleConfig] = None,
                          bound: Optional[float] = None, dim=None) -> CheckResult:
    """Smallest ``<u - v, x - y> / ||u - v||^2`` over sampled graph pairs.

    Passes when the statistic is positive (beyond ``tol``), or at least
    ``bound - tol`` when ``bound`` is given.
    """
    cfg = cfg or SampleConfig()
    if bound is None:
        passes = lambda s: s > cfg.tol
    else:
        passes = lambda s: s >= float(bound) - cfg.tol * max(1.0, abs(float(bound)))
    return _graph_check(src, cfg, dim, _cocoercive_ratio, lambda a, b: a < b, "u", passes, "cocoercive")


def check_banach_contraction(src: Source, cfg: Optional[SampleConfig] = None,
                             margin: float = 1e-6, dim=None) -> CheckResult:
    """Sampled Lipschitz constant, passing iff it is at most ``1 - margin``."""
    res = _graph_check(src, cfg, dim, _lipschitz_ratio, lambda a, b: a > b, "x",
                       lambda s: s <= 1.0 - margin, "banach-contraction")
    res.details["margin"] = margin
    return res


# ---------------------------------------------------------------------------
# maps


def _as_map(src) -> Tuple[Callable, Optional[int]]:
    if isinstance(src, AverageSpec):
        return (lambda x: averaged_resolvent(src, x)), src.dim
    if isinstance(src, Operator):
        return Resolvent(src), src.dim
    if isinstance(src, np.ndarray):
        return (lambda x: src @ x), src.shape[0]
    return src, getattr(src, "dim", None)


def _map_check(src, cfg, dim, stat, prop):
    cfg = cfg or SampleConfig()
    T, d = _as_map(src)
    d = _source_dim(src, dim if dim is not None else d)
    pts = sample_points(d, cfg)
    xs = pts
    ts = np.array([as_vector(T(x), "Tx") for x in pts])
    pairs = sample_pairs(len(pts), n_probes(d), cfg)
    best, arg, used = _pair_scan(xs, ts, pairs, stat, lambda a, b: a > b,
                                 lambda i, j: np.linalg.norm(xs[i] - xs[j]) < MIN_SEPARATION)
    details = {"property": prop}
    if used < MIN_PAIRS:
        return CheckResult(INCONCLUSIVE, math.nan if best is None else best, None, used, cfg.seed, details)
    ok = best <= cfg.tol
    return CheckResult(PASS if ok else FAIL, best, _witness(xs, ts, arg), used, cfg.seed, details)


def check_firmly_nonexpansive(src, cfg: Optional[SampleConfig] = None, dim=None) -> CheckResult:
    """Largest ``(||Tx - Ty||^2 - <x - y, Tx - Ty>) / ||x - y||^2`` over sampled pairs.

    ``src`` is a map: an operator or average stands for its (averaged)
    resolvent; :class:`Resolvent`, :class:`Reflection`, a square array or
    any callable are used as given. Witness entries are ``(x, Tx)``.
    """
    return _map_check(src, cfg, dim, _firm_violation, "firmly-nonexpansive")


def check_nonexpansive(src, cfg: Optional[SampleConfig] = None, dim=None) -> CheckResult:
    """Largest ``(||Tx - Ty||^2 - ||x - y||^2) / ||x - y||^2`` over sampled pairs."""
    return _map_check(src, cfg, dim, _nonexpansive_violation, "nonexpansive")


def check_disjoint_injectivity(src: Union[Operator, AverageSpec], cfg: Optional[SampleConfig] = None,
                               dim=None) -> CheckResult:
    """Strict nonexpansiveness of the resolvent on sampled distinct pairs.

    Fails at a pair with ``||Jx - Jy|| >= (1 - tol) ||x - y||``; the
    statistic is the largest observed ratio ``||Jx - Jy|| / ||x - y||``.
    Witness entries are ``(x, Jx)``.
    """
    cfg = cfg or SampleConfig()
    T, d = _as_map(src)
    d = _source_dim(src, dim if dim is not None else d)
    pts = sample_points(d, cfg)
    ts = np.array([T(x) for x in pts])
    pairs = sample_pairs(len(pts), n_probes(d), cfg)
    best, arg, used = _pair_scan(pts, ts, pairs, _lipschitz_ratio, lambda a, b: a > b,
                                 lambda i, j: np.linalg.norm(pts[i] - pts[j]) < MIN_SEPARATION)
    details = {"property": "disjoint-injective"}
    if used < MIN_PAIRS:
        return CheckResult(INCONCLUSIVE, math.nan if best is None else best, None, used, cfg.seed, details)
    ok = best < 1.0 - cfg.tol
    return CheckResult(PASS if ok else FAIL, best, _witness(pts, ts, arg), used, cfg.seed, details)


# ---------------------------------------------------------------------------
# exact matrix checks


def numerical_rank(M, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def check_paramonotone_matrix(M, rtol: float = RANK_RTOL) -> CheckResult:
    """Rank test ``rank M == rank (M + M^T)/2`` for a monotone matrix.

    The same verdict decides rectangularity. On failure the witness is the
    graph pair ``(d, M d), (0, 0)`` with ``d`` in the kernel of the
    symmetric part and ``M d != 0``: the pair is orthogonal, yet the crossed
    point ``(d, 0)`` is not on the graph. The statistic is the rank gap.
    """
    M = as_monotone_matrix(M)
    sym = 0.5 * (M + M.T)
    r, r_sym = numerical_rank(M, rtol), numerical_rank(sym, rtol)
    details = {"rank": r, "rank_symmetric_part": r_sym}
    if r == r_sym:
        return CheckResult(PASS, 0.0, None, 0, None, details)
    _, s, vt = np.linalg.svd(sym)
    cutoff = rtol * max(s[0], np.max(np.abs(M)))
    kernel = vt[s <= cutoff]
    _, _, wt = np.linalg.svd(M @ kernel.T)
    d = kernel.T @ wt[0]
    zero = np.zeros(M.shape[0])
    return CheckResult(FAIL, float(r - r_sym), [[d, M @ d], [zero, zero]], 0, None, details)


def fitzpatrick_matrix(M, x, v, rtol: float = FITZPATRICK_RTOL) -> float:
    """Fitzpatrick function of a monotone matrix at ``(x, v)``.

    With ``b = M^T x + v`` and ``S = (M + M^T)/2`` the supremum over
    ``z`` of ``<z, b> - <z, S z>`` is ``b^T S^+ b / 4`` when ``b`` lies in
    the range of ``S`` and ``+inf`` otherwise.

    >>> fitzpatrick_matrix(np.eye(2), [1.0, 0.0], [1.0, 2.0])
    2.0
    """
    M = as_monotone_matrix(M)
    x = as_vector(x)
    v = as_vector(v, "v")
    b = M.T @ x + v
    S = 0.5 * (M + M.T)
    Sp = np.linalg.pinv(S, rcond=rtol, hermitian=True)
    nb = float(np.linalg.norm(b))
    if np.linalg.norm(b - S @ (Sp @ b)) > rtol * max(1.0, nb) * max(1.0, float(np.linalg.norm(M))):
        return math.inf
    return 0.25 * float(b @ Sp @ b)


def _finite_rhs_constraints(mats: Sequence[np.ndarray], mu: float, rtol: float) -> np.ndarray:
    # rows C with C @ (x, v) = 0 exactly when every mu M_i^T x + v is in range(S_i)
    d = mats[0].shape[0]
    rows = []
    for M in mats:
        S = 0.5 * (M + M.T)
        _, s, vt = np.linalg.svd(S)
        kernel = vt[s <= rtol * max(1.0, s[0])]
        for n in kernel:
            rows.append(np.concatenate([mu * (M @ n), n]))
    return np.array(rows) if rows else np.zeros((0, 2 * d))


def check_fitzpatrick_inequality(matrices, lambdas, mu=1.0, cfg: Optional[SampleConfig] = None) -> CheckResult:
    """Sampled check of ``F_{mu R} <= sum lambda_i F_{mu A_i}`` for matrices.

    The ``cfg.pair_count`` samples ``(x, v)`` are drawn on the subspace
    where every right-hand term is finite (elsewhere the inequality holds
    trivially); samples whose right side still evaluates to ``inf`` are
    skipped. The statistic is the largest ``lhs - rhs``; the witness is
    ``[(x, v)]``.
    """
    cfg = cfg or SampleConfig()
    mats = [as_monotone_matrix(m) for m in matrices]
    mu = float(mu)
    R = resolvent_average_matrix(mats, lambdas, mu)
    d = R.shape[0]
    rng = np.random.default_rng(cfg.seed)
    C = _finite_rhs_constraints(mats, mu, FITZPATRICK_RTOL)
    if C.shape[0]:
        _, s, vt = np.linalg.svd(C)
        rank = int(np.sum(s > 1e-12 * max(1.0, s[0])))
        free = vt[rank:]
    else:
        free = np.eye(2 * d)
    samples = []
    for _ in range(cfg.pair_count):
        w = rng.uniform(-cfg.radius, cfg.radius, 2 * d)
        samples.append(free.T @ (free @ w))
    worst, arg, used = -math.inf, None, 0
    for w in samples:
        x, v = w[:d], w[d:]
        rhs = sum(float(l) * fitzpatrick_matrix(mu * M, x, v) for M, l in zip(mats, lambdas))
        if not math.isfinite(rhs):
            continue
        lhs = fitzpatrick_matrix(mu * R, x, v)
        used += 1
        gap = lhs - rhs
        if gap > worst:
            worst, arg = gap, (x, v, lhs, rhs)
    details = {"property": "fitzpatrick", "finite_rhs_samples": used}
    if used == 0:
        return CheckResult(INCONCLUSIVE, math.nan, None, 0, cfg.seed, details)
    x, v, lhs, rhs = arg
    details.update({"lhs": lhs, "rhs": rhs})
    ok = worst <= cfg.tol * max(1.0, abs(rhs))
    return CheckResult(PASS if ok else FAIL, worst, [[x, v]], used, cfg.seed, details)


# ---------------------------------------------------------------------------
# cyclic monotonicity


def check_k_cyclic(src: Source, k: int, cfg: Optional[SampleConfig] = None, dim=None) -> CheckResult:
    """Smallest cyclic sum over sampled ``k``-cycles of graph points.

    The cycles are every ordered ``k``-tuple of the corner points at
    ``x in {0, e_1, .., e_d}`` (when there are at most 1000 of them; points
    outside the domain are dropped) plus ``cfg.pair_count`` random
    ``k``-tuples of resolvent-sampled graph points. Passes iff the minimum
    is at least ``-tol``.
    """
    if int(k) < 2:
        raise SpecError("k must be at least 2")
    k = int(k)
    cfg = cfg or SampleConfig()
    sampler = GraphSampler(src, cfg, dim)
    d = sampler.dim
    corners = []
    for x in [np.zeros(d)] + list(np.eye(d)):
        try:
            corners.append((x, _evaluate(sampler.source, x, cfg)))
        except NotInDomain:
            continue
    cycles: List[List[Tuple[np.ndarray, np.ndarray]]] = []
    if corners and len(corners) ** k <= MAX_CORNER_TUPLES:
        cycles += [list(t) for t in itertools.product(corners, repeat=k)]
    xs, us = sampler.graph()
    rng = np.random.default_rng(cfg.seed + 2)
    for _ in range(cfg.pair_count):
        idx = rng.integers(0, len(xs), k)
        cycles.append([(xs[i], us[i]) for i in idx])
    sums = [cyclic_sum(c) for c in cycles]
    i = int(np.argmin(sums))
    best = sums[i]
    details = {"property": "k-cyclic", "k": k}
    ok = best >= -cfg.tol
    witness = [[x, u] for x, u in cycles[i]]
    return CheckResult(PASS if ok else FAIL, best, witness, len(cycles), cfg.seed, details)

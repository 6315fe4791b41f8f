"""Common zeros and common values by Picard iteration of the averaged resolvent.

The fixed points of ``T = sum lambda_i J_{mu A_i}`` are the zeros of the
resolvent average, and when the ``A_i`` share a zero they are exactly the
common zeros. Emptiness of the intersection is never certified.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .averaging import averaged_resolvent
from .operators import resolve
from .results import jsonable
from .specs import AverageSpec, SampleConfig, Shifted, as_vector, check_dim

STALL_WINDOW = 1000
MAX_STORED_ITERATES = 1000


@dataclass
class SolveTrace:
    iterates: List[np.ndarray]
    residuals: List[float]
    converged: bool
    iterations: int
    stalled: bool = False
    operator_residuals: List[float] = field(default_factory=list)
    thinning: int = 1

    def common(self, tol: float) -> bool:
        """Whether the last iterate is a fixed point of every resolvent within ``tol``."""
        return bool(self.operator_residuals) and max(self.operator_residuals) <= tol

    def jsonl(self) -> str:
        """One ``{"k": .., "residual": ..}`` object per line."""
        return "".join(
            json.dumps({"k": k + 1, "residual": jsonable(r)}) + "\n"
            for k, r in enumerate(self.residuals)
        )

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "stalled": self.stalled,
            "final_residual": self.residuals[-1] if self.residuals else None,
            "operator_residuals": list(self.operator_residuals),
        }


def operator_residuals(avg: AverageSpec, x) -> List[float]:
    """``||J_{mu A_i} x - x||`` for each operator of the average."""
    mu = float(avg.mu)
    return [float(np.linalg.norm(resolve(op, mu, x) - x)) for op in avg.ops]


def solve_common_zero(avg: AverageSpec, x0, cfg: Optional[SampleConfig] = None) -> Tuple[np.ndarray, SolveTrace]:
    """Iterate ``x <- sum lambda_i J_{mu A_i}(x)`` until the step is at most ``cfg.tol``.

    The run also stops early, with ``stalled=True``, when the step stays
    above ``tol`` for 1000 consecutive iterations without reaching a new
    minimum. ``converged`` alone does not mean a common zero was found
    (the averaged map has fixed points even when the ``A_i`` share no
    zero); compare ``trace.operator_residuals`` with the tolerance, or use
    :meth:`SolveTrace.common`.
    """
    cfg = cfg or SampleConfig()
    x = as_vector(x0, "x0").copy()
    check_dim(avg.dim, x)
    thin = max(1, int(cfg.max_iter) // MAX_STORED_ITERATES)
    iterates = [x.copy()]
    residuals: List[float] = []
    best_step = np.inf
    since_best = 0
    converged = stalled = False
    k = 0
    for k in range(1, int(cfg.max_iter) + 1):
        nxt = averaged_resolvent(avg, x)
        step = float(np.linalg.norm(nxt - x))
        x = nxt
        residuals.append(step)
        if k % thin == 0:
            iterates.append(x.copy())
        if step <= cfg.tol:
            converged = True
            break
        if step < best_step:
            best_step, since_best = step, 0
        else:
            since_best += 1
            if since_best >= STALL_WINDOW:
                stalled = True
                break
    if k % thin != 0:
        iterates.append(x.copy())
    trace = SolveTrace(iterates, residuals, converged, k, stalled, operator_residuals(avg, x), thin)
    return x, trace


def solve_common_value(avg: AverageSpec, u, x0, cfg: Optional[SampleConfig] = None) -> Tuple[np.ndarray, SolveTrace]:
    """Find ``x`` with ``u in A_i(x)`` for every ``i`` by solving for zeros of ``A_i - u``."""
    u = as_vector(u, "u")
    shifted = AverageSpec(tuple(Shifted(op, range_shift=u) for op in avg.ops), avg.weights, avg.mu)
    return solve_common_zero(shifted, x0, cfg)

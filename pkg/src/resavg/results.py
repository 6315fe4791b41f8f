from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, List, Optional

import numpy as np

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


def jsonable(obj):
    """Convert arrays, tuples and non-finite floats into plain JSON values."""
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating, float)):
        v = float(obj) + 0.0  # folds -0.0 into 0.0
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class CheckResult:
    """Outcome of a sampled or exact property check.

    ``statistic`` is the estimated constant or the worst margin seen;
    ``witness`` holds the points realizing it (graph points ``(x, u)`` for
    operator checks).
    """

    verdict: str
    statistic: float
    witness: Optional[List[Any]] = None
    samples_used: int = 0
    seed: Optional[int] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in (PASS, FAIL, INCONCLUSIVE):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if self.verdict == FAIL and not self.witness:
            raise ValueError("a failing check must carry a witness")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "statistic": jsonable(self.statistic),
            "witness": jsonable(self.witness) if self.witness is not None else [],
            "seed": self.seed,
            "samples": int(self.samples_used),
        }
        if self.details:
            out["details"] = jsonable(self.details)
        return out

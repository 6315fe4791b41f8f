"""Resolvent averages of monotone operators and proximal averages of convex functions."""

from .analysis import (
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
    estimate_cocoercivity,
    estimate_lipschitz,
    estimate_monotonicity_modulus,
    fitzpatrick_matrix,
)
from .averaging import (
    SingularAverageError,
    averaged_resolvent,
    evaluate_average,
    inverse_average,
    r_mu,
    resolvent_average_affine,
    resolvent_average_matrix,
)
from .extended import ExtNonneg, ExtNonnegError
from .feasibility import SolveTrace, solve_common_value, solve_common_zero
from .operators import NotInDomain, evaluate_operator, project, prox, resolve
from .proximal import (
    BracketExhaustedError,
    conjugate_value,
    modulus_average,
    prox_of_average_consistency,
    proximal_average_value,
)
from .pythagorean import PythagoreanTriple, RationalMatrix2, euclid_triple, rotation_average_rational
from .results import CheckResult
from .specs import (
    AffineSubspace,
    AverageSpec,
    Ball,
    Box,
    Constant,
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
)

__version__ = "0.1.0"

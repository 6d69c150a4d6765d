"""Precision-matrix estimation for Gaussian graphical models.

Ridge-family closed-form estimators, a graphical lasso solver, a 2-step
combination of the two, dual-route verification utilities, synthetic
network generators, loss metrics, cross-validated tuning, and a
discriminant-analysis / financial-network application layer.
"""

from .errors import (
    ConvergenceFailure,
    GenerationFailure,
    InputError,
    InvalidInput,
    InvalidSplit,
    NotPositiveDefinite,
    NotPositiveSemiDefinite,
    NumericalFailure,
    PrecimatError,
    SelectionFailure,
    SingularMatrix,
)
from .estimators import (
    GenTuningParams,
    TargetSpec,
    TuningParams,
    alt_ridge_I,
    alt_ridge_I_noinv,
    alt_ridge_II,
    archetype1,
    archetype2,
    en_objective,
    generalized,
    two_step,
)
from .glasso import GlassoFit, glasso_fit, kkt_check, lasso_cd, penalized_objective

__all__ = [
    "ConvergenceFailure",
    "GenerationFailure",
    "GenTuningParams",
    "GlassoFit",
    "InputError",
    "InvalidInput",
    "InvalidSplit",
    "NotPositiveDefinite",
    "NotPositiveSemiDefinite",
    "NumericalFailure",
    "PrecimatError",
    "SelectionFailure",
    "SingularMatrix",
    "TargetSpec",
    "TuningParams",
    "alt_ridge_I",
    "alt_ridge_I_noinv",
    "alt_ridge_II",
    "archetype1",
    "archetype2",
    "en_objective",
    "generalized",
    "glasso_fit",
    "kkt_check",
    "lasso_cd",
    "penalized_objective",
    "two_step",
]

__version__ = "0.1.0"

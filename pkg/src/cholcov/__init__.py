"""Covariance estimation by regularizing the Cholesky factor of the
covariance matrix or its inverse: banding, lasso and nested-lasso
penalized variants, a Monte Carlo comparison harness, random-splitting
tuning selection, and QDA classification tooling."""

from .errors import (
    CholcovError,
    DegenerateResidual,
    DimMismatch,
    InsufficientData,
    InvalidBand,
    NoConvergence,
    NotPositiveDefinite,
    ParseError,
    ShapeError,
    SingularCovariance,
)
from .estimators import (
    CovarianceEstimate,
    DataMatrix,
    EstimatorSpec,
    band_matrix,
    center,
    chol_banding,
    diagonal_estimator,
    fit,
    inv_chol_banding,
    ledoit_wolf,
    penalized_chol,
    sample_banding,
    sample_covariance,
)
from .linalg import (
    CholeskyFactors,
    EigenDecomposition,
    frobenius_norm,
    invert_unit_lower,
    is_positive_definite,
    modified_cholesky,
    operator_norm,
    precision_factors,
    reconstruct,
    sym_eigen,
)

__version__ = "0.1.0"

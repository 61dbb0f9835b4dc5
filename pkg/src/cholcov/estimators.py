"""Covariance estimators.

All estimators consume a centered DataMatrix and return a
CovarianceEstimate.  The regression-based family (chol_banding,
penalized variants) regularizes the unit lower-triangular factor of the
covariance itself; inv_chol_banding regularizes the factor of the
precision matrix.  Banded estimates carry exact structural zeros, never
rounded ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import penalty as pen
from .errors import CholcovError, DegenerateResidual, InvalidBand
from .linalg import (
    CholeskyFactors,
    invert_unit_lower,
    modified_cholesky,
    reconstruct,
)

METHODS = (
    "sample",
    "sample_banding",
    "chol_banding",
    "inv_chol_banding",
    "ledoit_wolf",
    "diagonal",
    "lasso_chol",
    "nested_lasso_chol",
)

BANDED_METHODS = ("sample_banding", "chol_banding", "inv_chol_banding")
PENALIZED_METHODS = ("lasso_chol", "nested_lasso_chol")

# Residual second moment below this fraction of the response second
# moment means the regression is effectively exact and D would be
# numerically singular.
DEGENERATE_REL_TOL = 1e-14


@dataclass(frozen=True)
class DataMatrix:
    """n x p table of observations, rows are samples."""

    values: np.ndarray
    centered: bool = False

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class EstimatorSpec:
    method: str
    k: Optional[int] = None
    lam: Optional[float] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class CovarianceEstimate:
    sigma: np.ndarray
    spec: EstimatorSpec
    factors: Optional[CholeskyFactors] = None
    # (T, d) with Omega = T^T diag(1/d) T, present for inv_chol_banding
    inverse_factors: Optional[CholeskyFactors] = None


def center(raw) -> DataMatrix:
    """Subtract each column's sample mean."""
    x = np.asarray(raw, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise CholcovError(
            f"need an n x p table with n >= 2, got shape {x.shape}")
    return DataMatrix(values=x - x.mean(axis=0), centered=True)


def _require_centered(data: DataMatrix):
    if not data.centered:
        raise ValueError("data must be centered first (see center())")


def sample_covariance(data: DataMatrix) -> CovarianceEstimate:
    """Maximum likelihood sample covariance X^T X / n (divisor n)."""
    _require_centered(data)
    x = data.values
    sigma = x.T @ x / data.n
    return CovarianceEstimate(sigma=sigma, spec=EstimatorSpec("sample"))


def band_matrix(m, k: int) -> np.ndarray:
    """Zero every entry more than k positions off the main diagonal."""
    m = np.asarray(m, dtype=float)
    if k < 0:
        raise InvalidBand(f"band k must be >= 0, got {k}")
    p = m.shape[0]
    idx = np.arange(p)
    mask = np.abs(idx[:, None] - idx[None, :]) <= k
    return np.where(mask, m, 0.0)


def sample_banding(data: DataMatrix, k: int) -> CovarianceEstimate:
    """Band the sample covariance directly; not guaranteed positive
    definite."""
    est = sample_covariance(data)
    sigma = band_matrix(est.sigma, k)
    return CovarianceEstimate(sigma=sigma,
                              spec=EstimatorSpec("sample_banding", k=k))


def _check_band(data: DataMatrix, k: int):
    if k < 0 or k >= min(data.n - 1, data.p):
        raise InvalidBand(
            f"band k={k} must satisfy 0 <= k < min(n-1, p) = "
            f"{min(data.n - 1, data.p)}")


def _residual_variance(e, msq_response, n):
    d = float(e @ e) / n
    if msq_response <= 0.0 or d < DEGENERATE_REL_TOL * msq_response:
        raise DegenerateResidual(
            "regression residual is numerically zero (collinear data)")
    return d


def chol_banding(data: DataMatrix, k: int) -> CovarianceEstimate:
    """Band the covariance Cholesky factor via sequential residual
    regressions.

    e_1 = x_1; for j >= 2 the response x_j is regressed on the k most
    recent residuals.  Those residuals are mutually orthogonal within any
    window of width k, so each fit reduces to at most k univariate
    projections and the whole estimate costs O(k p n).  The result
    L diag(d) L^T is positive definite by construction.
    """
    _require_centered(data)
    _check_band(data, k)
    x = data.values
    n, p = x.shape
    e = np.empty((n, p))
    lower = np.eye(p)
    d = np.empty(p)
    sq = np.empty(p)  # residual squared norms, tracked to avoid recompute
    e[:, 0] = x[:, 0]
    sq[0] = float(e[:, 0] @ e[:, 0])
    d[0] = _residual_variance(e[:, 0], float(x[:, 0] @ x[:, 0]) / n, n)
    for j in range(1, p):
        lo = max(0, j - k)
        xj = x[:, j]
        if lo < j:
            z = e[:, lo:j]
            coef = (z.T @ xj) / sq[lo:j]
            ej = xj - z @ coef
            lower[j, lo:j] = coef
        else:
            ej = xj.copy()
        e[:, j] = ej
        sq[j] = float(ej @ ej)
        d[j] = _residual_variance(ej, float(xj @ xj) / n, n)
    factors = CholeskyFactors(unit_lower=lower, diag=d)
    return CovarianceEstimate(sigma=reconstruct(factors),
                              spec=EstimatorSpec("chol_banding", k=k),
                              factors=factors)


def inv_chol_banding(data: DataMatrix, k: int) -> CovarianceEstimate:
    """Band the Cholesky factor of the precision matrix.

    Each x_j is regressed on its k immediate predecessor variables
    (the variables themselves, not residuals).  T collects the negated
    coefficients with unit diagonal, d the residual variances, and
    Omega = T^T diag(1/d) T.  The returned sigma is Omega^{-1} obtained
    through the triangular factors.
    """
    _require_centered(data)
    _check_band(data, k)
    x = data.values
    n, p = x.shape
    t = np.eye(p)
    d = np.empty(p)
    for j in range(p):
        lo = max(0, j - k)
        xj = x[:, j]
        if lo < j:
            z = x[:, lo:j]
            coef, *_ = np.linalg.lstsq(z, xj, rcond=None)
            resid = xj - z @ coef
            t[j, lo:j] = -coef
        else:
            resid = xj
        d[j] = _residual_variance(resid, float(xj @ xj) / n, n)
    inverse_factors = CholeskyFactors(unit_lower=t, diag=d)
    lower = invert_unit_lower(t)
    factors = CholeskyFactors(unit_lower=lower, diag=d)
    return CovarianceEstimate(sigma=reconstruct(factors),
                              spec=EstimatorSpec("inv_chol_banding", k=k),
                              factors=factors,
                              inverse_factors=inverse_factors)


def precision_from_estimate(est: CovarianceEstimate):
    """(Omega, log det Omega) from an estimate's triangular factors.

    Uses the stored precision factors when present, otherwise inverts the
    unit lower-triangular covariance factor; log det comes from the
    diagonal, never from a dense determinant.
    """
    if est.inverse_factors is not None:
        t = est.inverse_factors.unit_lower
        d = est.inverse_factors.diag
    elif est.factors is not None:
        t = invert_unit_lower(est.factors.unit_lower)
        d = est.factors.diag
    else:
        f = modified_cholesky(est.sigma)
        t = invert_unit_lower(f.unit_lower)
        d = f.diag
    omega = t.T @ (t / d[:, None])
    logdet = -float(np.sum(np.log(d)))
    return omega, logdet


def ledoit_wolf(data: DataMatrix) -> CovarianceEstimate:
    """Shrinkage toward a scaled identity.

    Sigma_hat = rho * mu * I + (1 - rho) * S with mu = trace(S)/p and
    intensity rho = b^2 / d^2 estimated from the data (clipped to [0,1]).
    """
    _require_centered(data)
    x = data.values
    n, p = x.shape
    s = x.T @ x / n
    mu = float(np.trace(s)) / p
    delta = s - mu * np.eye(p)
    d2 = float(np.sum(delta * delta)) / p
    if d2 <= 0.0:
        sigma = mu * np.eye(p)
        intensity = 0.0
    else:
        # dispersion of rank-one summands x_i x_i^T around S; the cross
        # term collapses because sum_i x_i^T S x_i = n ||S||_F^2
        row_sq = np.einsum("ij,ij->i", x, x)
        s_frob2 = float(np.sum(s * s))
        b_bar2 = (float(np.sum(row_sq ** 2)) - n * s_frob2) / (n * n * p)
        b_bar2 = max(b_bar2, 0.0)
        b2 = min(b_bar2, d2)
        intensity = b2 / d2
        sigma = intensity * mu * np.eye(p) + (1.0 - intensity) * s
    spec = EstimatorSpec("ledoit_wolf", lam=intensity)
    return CovarianceEstimate(sigma=sigma, spec=spec)


def diagonal_estimator(data: DataMatrix) -> CovarianceEstimate:
    """Diagonal of the sample covariance (naive Bayes covariance)."""
    _require_centered(data)
    x = data.values
    d = np.einsum("ij,ij->j", x, x) / data.n
    factors = CholeskyFactors(unit_lower=np.eye(data.p), diag=d.copy())
    return CovarianceEstimate(sigma=np.diag(d),
                              spec=EstimatorSpec("diagonal"),
                              factors=factors)


def penalized_chol(data: DataMatrix, penalty: str, lam: float) -> CovarianceEstimate:
    """Penalized sequential residual regressions with the full
    predecessor set.

    Each x_j is regressed on all previous residuals e_1..e_{j-1} with a
    lasso or nested-lasso penalty at level ``lam``; residuals from the
    penalized fits feed the later regressions.  lam = 0 reduces to the
    unregularized fit (and hence, for p < n, the sample covariance).
    """
    _require_centered(data)
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if penalty == "lasso":
        solver = pen.solve_lasso
        method = "lasso_chol"
    elif penalty == "nested_lasso":
        solver = pen.solve_nested_lasso
        method = "nested_lasso_chol"
    else:
        raise ValueError(f"unknown penalty {penalty!r}")
    x = data.values
    n, p = x.shape
    e = np.empty((n, p))
    lower = np.eye(p)
    d = np.empty(p)
    e[:, 0] = x[:, 0]
    d[0] = _residual_variance(e[:, 0], float(x[:, 0] @ x[:, 0]) / n, n)
    for j in range(1, p):
        xj = x[:, j]
        prob = pen.PenalizedProblem(response=xj, design=e[:, :j], lam=lam,
                                    penalty_kind=penalty)
        coef = solver(prob).coefficients
        ej = xj - e[:, :j] @ coef
        lower[j, :j] = coef
        e[:, j] = ej
        d[j] = _residual_variance(ej, float(xj @ xj) / n, n)
    factors = CholeskyFactors(unit_lower=lower, diag=d)
    return CovarianceEstimate(sigma=reconstruct(factors),
                              spec=EstimatorSpec(method, lam=lam),
                              factors=factors)


def fit(data: DataMatrix, spec: EstimatorSpec) -> CovarianceEstimate:
    """Dispatch on spec.method."""
    m = spec.method
    if m == "sample":
        return sample_covariance(data)
    if m == "sample_banding":
        return sample_banding(data, spec.k)
    if m == "chol_banding":
        return chol_banding(data, spec.k)
    if m == "inv_chol_banding":
        return inv_chol_banding(data, spec.k)
    if m == "ledoit_wolf":
        return ledoit_wolf(data)
    if m == "diagonal":
        return diagonal_estimator(data)
    if m == "lasso_chol":
        return penalized_chol(data, "lasso", spec.lam)
    if m == "nested_lasso_chol":
        return penalized_chol(data, "nested_lasso", spec.lam)
    raise ValueError(f"unknown method {m!r}")

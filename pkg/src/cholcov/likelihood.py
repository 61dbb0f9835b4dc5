"""Normal negative log-likelihood in the (T, d) parameterization.

The precision matrix is Omega = T^T diag(1/d) T with T unit lower
triangular.  Up to an additive constant the negative log-likelihood of
centered data X is

    sum_j ( n log d_j + || X t_j ||^2 / d_j )

where t_j is row j of T, so X t_j stacks the per-observation terms
x_ij + sum_{v<j} t_jv x_iv.  Closed-form gradients over the free banded
parameters make the stationarity of the precision-banding estimate, and
the non-stationarity of the covariance-banding estimate, directly
checkable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch
from .estimators import DataMatrix, chol_banding

FD_STEP = 1e-5  # central finite-difference step used by the test oracles


@dataclass(frozen=True)
class LikelihoodValue:
    value: float
    # full p x p array; only entries (j, v) with max(0, j-band) <= v < j
    # are free parameters, the rest are zero
    grad_unit_lower: np.ndarray
    grad_diag: np.ndarray


def neg_loglik_td(data: DataMatrix, t, d, band) -> LikelihoodValue:
    """Value and gradient of the banded (T, d) negative log-likelihood."""
    x = data.values
    n, p = x.shape
    t = np.asarray(t, dtype=float)
    d = np.asarray(d, dtype=float)
    if t.shape != (p, p) or d.shape != (p,):
        raise DimMismatch("factor shapes do not match the data dimension")
    r = x @ t.T                       # column j holds X t_j
    rss = np.einsum("ij,ij->j", r, r)
    value = float(np.sum(n * np.log(d) + rss / d))

    grad_t = 2.0 * (r.T @ x) / d[:, None]
    idx = np.arange(p)
    free = (idx[None, :] < idx[:, None]) & (idx[None, :] >= idx[:, None] - band)
    grad_t = np.where(free, grad_t, 0.0)
    grad_d = n / d - rss / d ** 2
    return LikelihoodValue(value=value, grad_unit_lower=grad_t, grad_diag=grad_d)


def banded_constraint_objective(data: DataMatrix, l21, l32, d):
    """The p = 3, k = 1 likelihood expressed in covariance-factor
    coordinates with the (3,1) entry constrained to zero."""
    x = data.values
    n = x.shape[0]
    x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
    r2 = x2 - l21 * x1
    r3 = x3 + l32 * l21 * x1 - l32 * x2
    return float(
        n * np.sum(np.log(d))
        + (x1 @ x1) / d[0]
        + (r2 @ r2) / d[1]
        + (r3 @ r3) / d[2]
    )


def prop4_gradient(data: DataMatrix) -> float:
    """Partial derivative of the constrained likelihood with respect to
    the (2,1) factor entry, at the covariance-banding solution.

    Requires p = 3; fits chol_banding at k = 1 and evaluates the closed
    form.  The derivative collapses to 2 * l32 * (x1 . x3) / d33, and the
    full expression is cross-checked against that collapsed form to 1e-8
    relative as an internal consistency guard.
    """
    if data.p != 3:
        raise DimMismatch("this check is specific to p = 3")
    est = chol_banding(data, k=1)
    lower = est.factors.unit_lower
    d = est.factors.diag
    l21 = lower[1, 0]
    l32 = lower[2, 1]
    x = data.values
    x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
    s11, s12, s13 = x1 @ x1, x1 @ x2, x1 @ x3

    full = (2.0 * l21 * s11 - 2.0 * s12) / d[1] + (
        2.0 * l32 * s13 - 2.0 * l32 ** 2 * s12 + 2.0 * l21 * l32 ** 2 * s11
    ) / d[2]
    closed = 2.0 * l32 * s13 / d[2]
    scale = max(abs(closed), 1.0)
    if abs(full - closed) > 1e-8 * scale:
        raise ArithmeticError(
            f"gradient forms disagree: {full!r} vs {closed!r}")
    return float(closed)

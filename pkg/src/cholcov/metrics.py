"""Evaluation metrics for covariance estimates against a known truth."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimMismatch
from .linalg import frobenius_norm, is_positive_definite, operator_norm, sym_eigen


@dataclass(frozen=True)
class MetricsReport:
    operator_loss: float
    frobenius_loss: float
    tpr: Optional[float]          # None when the truth has no nonzeros
    tnr: Optional[float]          # None when the truth has no zeros
    kq_curve: np.ndarray          # K(q) for q = 1..p
    eigenvalues: np.ndarray       # estimate's spectrum, descending
    positive_definite: bool


def _check_pair(est, truth):
    est = np.asarray(est, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if est.shape != truth.shape or est.ndim != 2:
        raise DimMismatch(f"shape mismatch: {est.shape} vs {truth.shape}")
    return est, truth


def operator_loss(est, truth) -> float:
    est, truth = _check_pair(est, truth)
    return operator_norm(est - truth)


def frobenius_loss(est, truth) -> float:
    est, truth = _check_pair(est, truth)
    return frobenius_norm(est - truth)


def sparsity_rates(est, truth, zero_tol=0.0):
    """(TPR, TNR) over all (i, j) pairs, diagonal included.

    An estimate entry counts as zero when |entry| <= zero_tol; the
    default 0.0 suits banding estimators whose off-band zeros are exact.
    Either rate is None when its denominator (truth nonzeros / zeros) is
    empty.
    """
    est, truth = _check_pair(est, truth)
    est_zero = np.abs(est) <= zero_tol
    truth_zero = truth == 0.0
    n_nonzero = int(np.sum(~truth_zero))
    n_zero = int(np.sum(truth_zero))
    tpr = None
    tnr = None
    if n_nonzero:
        tpr = float(np.sum(~est_zero & ~truth_zero)) / n_nonzero
    if n_zero:
        tnr = float(np.sum(est_zero & truth_zero)) / n_zero
    return tpr, tnr


def krzanowski(est, truth, q) -> float:
    """Eigenspace agreement K(q): sum of squared inner products between
    the top-q eigenvectors of the two matrices.  Equals q when the spans
    coincide."""
    est, truth = _check_pair(est, truth)
    p = est.shape[0]
    if not 1 <= q <= p:
        raise DimMismatch(f"q must be in 1..{p}, got {q}")
    ve = sym_eigen(est).vectors[:, :q]
    vt = sym_eigen(truth).vectors[:, :q]
    inner = ve.T @ vt
    return float(np.sum(inner * inner))


def kq_curve(est, truth) -> np.ndarray:
    """K(q) for every q in 1..p, from one pair of eigendecompositions."""
    est, truth = _check_pair(est, truth)
    ve = sym_eigen(est).vectors
    vt = sym_eigen(truth).vectors
    sq = (ve.T @ vt) ** 2
    # K(q) is the sum of the leading q x q block of sq
    return np.cumsum(np.cumsum(sq, axis=0), axis=1).diagonal().copy()


def compute_report(est, truth, zero_tol=0.0, pd_tol=None) -> MetricsReport:
    est, truth = _check_pair(est, truth)
    tpr, tnr = sparsity_rates(est, truth, zero_tol=zero_tol)
    eig = sym_eigen(est).values
    return MetricsReport(
        operator_loss=operator_loss(est, truth),
        frobenius_loss=frobenius_loss(est, truth),
        tpr=tpr,
        tnr=tnr,
        kq_curve=kq_curve(est, truth),
        eigenvalues=eig,
        positive_definite=is_positive_definite(est, tol=pd_tol),
    )

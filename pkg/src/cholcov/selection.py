"""Random-splitting tuning-parameter selection for real data.

The sample is split N times into a training third and a validation
remainder.  For the covariance-side banding methods the criterion is the
Frobenius distance between the banded training estimate and the
validation sample covariance; for precision-side banding it is the
validation negative log-likelihood.  Splits are paired across candidate
parameters (every k sees the same N splits), which lowers the variance
of the comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import estimators as est_mod
from . import penalty as pen
from .errors import CholcovError, InsufficientData
from .estimators import DataMatrix, EstimatorSpec
from .linalg import frobenius_norm
from .simulation import band_grid

DEFAULT_SPLITS = 100
DEFAULT_TRAIN_FRAC = 1.0 / 3.0


@dataclass(frozen=True)
class SelectionResult:
    selected: float          # chosen k (int-valued) or lambda
    criterion: np.ndarray    # averaged criterion per candidate
    candidates: np.ndarray


def _validation_neg_loglik(estimate, valid_cov, n_valid):
    """n * (trace(S_v Omega) - log|Omega|) using the triangular factors."""
    omega, logdet = est_mod.precision_from_estimate(estimate)
    return n_valid * (float(np.sum(valid_cov * omega)) - logdet)


def _split_once(data: DataMatrix, rng, train_frac=DEFAULT_TRAIN_FRAC):
    n = data.n
    n_train = math.ceil(n * train_frac)
    perm = rng.permutation(n)
    train_idx = perm[:n_train]
    valid_idx = perm[n_train:]
    train = est_mod.center(data.values[train_idx])
    valid = est_mod.center(data.values[valid_idx])
    return train, valid


def select_band_random_split(data: DataMatrix, method,
                             n_splits=DEFAULT_SPLITS,
                             train_frac=DEFAULT_TRAIN_FRAC,
                             seed=0) -> SelectionResult:
    """Pick the band parameter by averaging the split criterion over
    n_splits random train/validation partitions.

    Ties break toward smaller k.  Candidate fits that fail (degenerate
    residuals at large k on a small training third) are scored +inf for
    that split.
    """
    if method not in ("chol_banding", "sample_banding", "inv_chol_banding"):
        raise ValueError(f"unsupported method {method!r}")
    n = data.n
    if n < 6:
        raise InsufficientData(f"need n >= 6 observations, got {n}")
    n_train = math.ceil(n * train_frac)
    if n_train < 3:
        raise InsufficientData("training split would have fewer than 3 rows")

    candidates = band_grid(n_train, data.p)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    scores = np.zeros(len(candidates))
    for _ in range(n_splits):
        train, valid = _split_once(data, rng, train_frac)
        valid_cov = est_mod.sample_covariance(valid).sigma
        for ci, k in enumerate(candidates):
            try:
                estimate = est_mod.fit(train, EstimatorSpec(method, k=k))
                if method == "inv_chol_banding":
                    score = _validation_neg_loglik(estimate, valid_cov, valid.n)
                else:
                    score = frobenius_norm(estimate.sigma - valid_cov)
            except CholcovError:
                score = np.inf
            scores[ci] += score
    scores /= n_splits
    best = int(np.argmin(scores))  # argmin takes the first, smallest k, on ties
    return SelectionResult(selected=candidates[best],
                           criterion=scores,
                           candidates=np.asarray(candidates, dtype=float))


def select_lambda_random_split(data: DataMatrix, method,
                               n_splits=10,
                               train_frac=DEFAULT_TRAIN_FRAC,
                               seed=0) -> SelectionResult:
    """Same scheme for the penalized-factor estimators, over the standard
    25-point log-spaced lambda grid."""
    if method not in ("lasso_chol", "nested_lasso_chol"):
        raise ValueError(f"unsupported method {method!r}")
    if data.n < 6:
        raise InsufficientData(f"need n >= 6 observations, got {data.n}")
    gram = np.abs(data.values.T @ data.values)
    np.fill_diagonal(gram, 0.0)
    candidates = pen.lambda_grid(2.0 * float(gram.max()))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    scores = np.zeros(len(candidates))
    for _ in range(n_splits):
        train, valid = _split_once(data, rng, train_frac)
        valid_cov = est_mod.sample_covariance(valid).sigma
        for ci, lam in enumerate(candidates):
            try:
                estimate = est_mod.fit(train, EstimatorSpec(method, lam=float(lam)))
                score = frobenius_norm(estimate.sigma - valid_cov)
            except CholcovError:
                score = np.inf
            scores[ci] += score
    scores /= n_splits
    best = int(np.argmin(scores))
    return SelectionResult(selected=float(candidates[best]),
                           criterion=scores,
                           candidates=np.asarray(candidates, dtype=float))

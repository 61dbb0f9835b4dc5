"""Population models, seeded multivariate normal sampling, and the
Monte Carlo experiment runner.

Replication r of an experiment derives its random state from
``numpy.random.SeedSequence(master_seed, spawn_key=(r,))``, a documented
64-bit mixing scheme, so results do not depend on execution order or on
how many worker processes run the replications.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from . import estimators as est_mod
from . import metrics as metrics_mod
from . import penalty as pen
from .errors import CholcovError
from .estimators import DataMatrix, EstimatorSpec
from .linalg import modified_cholesky

DEFAULT_REPLICATIONS = 50
DEFAULT_N_TRAIN = 100
DEFAULT_N_VALID = 100
MAX_BAND_GRID = 50

# relative zero threshold for estimators whose zeros are shrinkage
# artifacts rather than structural
LASSO_ZERO_REL_TOL = 1e-8

TUNED_BAND_METHODS = ("sample_banding", "chol_banding", "inv_chol_banding")
TUNED_LAMBDA_METHODS = ("lasso_chol", "nested_lasso_chol")


def build_model(kind, p, rho=0.7, matrix=None) -> np.ndarray:
    """Population covariance by name.

    * ``ar1``: entries rho^|i-j| (dense factor, exponential decay);
    * ``ma4``: 4-banded matrix with off-diagonal levels
      (0.4, 0.2, 0.2, 0.1);
    * ``custom``: caller-supplied matrix, checked for positive
      definiteness.
    """
    if kind == "ar1":
        idx = np.arange(p)
        return rho ** np.abs(idx[:, None] - idx[None, :])
    if kind == "ma4":
        idx = np.arange(p)
        dist = np.abs(idx[:, None] - idx[None, :])
        levels = {0: 1.0, 1: 0.4, 2: 0.2, 3: 0.2, 4: 0.1}
        sigma = np.zeros((p, p))
        for off, val in levels.items():
            sigma[dist == off] = val
        return sigma
    if kind == "custom":
        sigma = np.asarray(matrix, dtype=float)
        modified_cholesky(sigma)  # raises NotPositiveDefinite if not PD
        return sigma
    raise ValueError(f"unknown model kind {kind!r}")


def sample_mvn(sigma, n, seed) -> DataMatrix:
    """Draw n rows from N(0, sigma), deterministically for a given seed.

    ``seed`` may be an int or a SeedSequence.  The transform is
    X = G A^T with A = L diag(sqrt(d)) from the LDL^T factorization of
    sigma and G standard normal from a PCG64 generator.
    """
    sigma = np.asarray(sigma, dtype=float)
    factors = modified_cholesky(sigma)
    a = factors.unit_lower * np.sqrt(factors.diag)[None, :]
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.PCG64(seed))
    g = rng.standard_normal((n, sigma.shape[0]))
    x = g @ a.T
    # estimators assume columns centered by their sample means
    return DataMatrix(values=x - x.mean(axis=0), centered=True)


@dataclass(frozen=True)
class ExperimentConfig:
    model_kind: str
    p_list: tuple
    methods: tuple                      # method name strings
    replications: int = DEFAULT_REPLICATIONS
    n_train: int = DEFAULT_N_TRAIN
    n_valid: int = DEFAULT_N_VALID
    master_seed: int = 20080517
    rho: float = 0.7
    n_jobs: int = 1


@dataclass
class CellResult:
    """Aggregated metrics for one (model, p, method) cell."""

    means: dict
    ses: dict
    pd_percent: float
    kq_mean: np.ndarray
    eigenvalues_mean: np.ndarray
    selected: list
    failures: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cells: dict = field(default_factory=dict)   # (p, method) -> CellResult


def band_grid(n, p):
    """Candidate band parameters 0..min(n-2, p-1), truncated at 50."""
    k_max = min(n - 2, p - 1, MAX_BAND_GRID)
    return list(range(0, k_max + 1))


def _lambda_grid_for(data: DataMatrix):
    x = data.values
    gram = np.abs(x.T @ x)
    np.fill_diagonal(gram, 0.0)
    lam_max = 2.0 * float(gram.max()) if gram.size else 1.0
    return [float(v) for v in pen.lambda_grid(lam_max)]


def _candidate_specs(method, train: DataMatrix):
    if method in TUNED_BAND_METHODS:
        return [EstimatorSpec(method, k=k) for k in band_grid(train.n, train.p)]
    if method in TUNED_LAMBDA_METHODS:
        return [EstimatorSpec(method, lam=lam) for lam in _lambda_grid_for(train)]
    return [EstimatorSpec(method)]


def select_by_validation(train: DataMatrix, valid_cov, method):
    """Fit every candidate on the training data and keep the one whose
    estimate is closest to the validation sample covariance in Frobenius
    norm.  Ties go to the earlier (more parsimonious) candidate."""
    best = None
    best_score = np.inf
    for spec in _candidate_specs(method, train):
        estimate = est_mod.fit(train, spec)
        score = metrics_mod.frobenius_loss(estimate.sigma, valid_cov)
        if score < best_score:
            best = estimate
            best_score = score
    return best


def _zero_tol_for(method, sigma):
    if method in TUNED_LAMBDA_METHODS:
        return LASSO_ZERO_REL_TOL * float(np.max(np.abs(sigma)))
    return 0.0


def _run_replication(sigma_true, cfg: ExperimentConfig, p, rep):
    ss = np.random.SeedSequence(cfg.master_seed, spawn_key=(rep,))
    seed_train, seed_valid = ss.spawn(2)
    train = sample_mvn(sigma_true, cfg.n_train, seed_train)
    valid = sample_mvn(sigma_true, cfg.n_valid, seed_valid)
    valid_cov = est_mod.sample_covariance(valid).sigma

    out = {}
    for method in cfg.methods:
        try:
            estimate = select_by_validation(train, valid_cov, method)
            report = metrics_mod.compute_report(
                estimate.sigma, sigma_true,
                zero_tol=_zero_tol_for(method, estimate.sigma))
            selected = estimate.spec.k if estimate.spec.k is not None \
                else estimate.spec.lam
            out[method] = (report, selected)
        except CholcovError as exc:
            out[method] = ("failed", str(exc))
    return out


SCALAR_METRICS = ("operator_loss", "frobenius_loss", "tpr", "tnr")


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run the full replication loop for every p in cfg.p_list.

    Per replication: draw independent training and validation samples,
    tune each method against the validation sample covariance, score the
    selected estimate against the truth.  Replication-level failures are
    counted and excluded from the aggregates.
    """
    result = ExperimentResult(config=cfg)
    for p in cfg.p_list:
        sigma_true = build_model(cfg.model_kind, p, rho=cfg.rho)
        reps = Parallel(n_jobs=cfg.n_jobs)(
            delayed(_run_replication)(sigma_true, cfg, p, r)
            for r in range(cfg.replications)
        )
        for method in cfg.methods:
            reports = []
            selected = []
            failures = 0
            for rep_out in reps:
                entry = rep_out[method]
                if entry[0] == "failed":
                    failures += 1
                    continue
                reports.append(entry[0])
                selected.append(entry[1])
            means, ses = {}, {}
            for name in SCALAR_METRICS:
                vals = [getattr(r, name) for r in reports]
                vals = [v for v in vals if v is not None]
                if not vals:
                    means[name] = None
                    ses[name] = None
                    continue
                arr = np.asarray(vals, dtype=float)
                means[name] = float(arr.mean())
                ses[name] = float(arr.std(ddof=1) / np.sqrt(arr.size)) \
                    if arr.size > 1 else 0.0
            pd_pct = 100.0 * np.mean([r.positive_definite for r in reports]) \
                if reports else float("nan")
            kq_mean = np.mean([r.kq_curve for r in reports], axis=0) \
                if reports else np.full(p, np.nan)
            eig_mean = np.mean([r.eigenvalues for r in reports], axis=0) \
                if reports else np.full(p, np.nan)
            result.cells[(p, method)] = CellResult(
                means=means, ses=ses, pd_percent=float(pd_pct),
                kq_mean=np.asarray(kq_mean),
                eigenvalues_mean=np.asarray(eig_mean),
                selected=selected, failures=failures)
    return result


def result_rows(result: ExperimentResult):
    """Flatten to (model, p, method, metric, mean, se) rows for CSV."""
    rows = []
    model = result.config.model_kind
    for (p, method), cell in result.cells.items():
        for name in SCALAR_METRICS:
            rows.append((model, p, method, name, cell.means[name],
                         cell.ses[name]))
        rows.append((model, p, method, "pd_percent", cell.pd_percent, None))
        tuned = [s for s in cell.selected if s is not None]
        if tuned:
            arr = np.asarray(tuned, dtype=float)
            se = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
            rows.append((model, p, method, "selected_param",
                         float(arr.mean()), se))
        rows.append((model, p, method, "failures", float(cell.failures), None))
    return rows


def result_to_dict(result: ExperimentResult):
    """JSON-ready nested structure, including the averaged scree and
    K(q) curves."""
    cfg = result.config
    out = {
        "model": cfg.model_kind,
        "replications": cfg.replications,
        "n_train": cfg.n_train,
        "n_valid": cfg.n_valid,
        "master_seed": cfg.master_seed,
        "cells": [],
    }
    for (p, method), cell in result.cells.items():
        out["cells"].append({
            "p": p,
            "method": method,
            "means": cell.means,
            "ses": cell.ses,
            "pd_percent": cell.pd_percent,
            "kq_curve": [float(v) for v in cell.kq_mean],
            "eigenvalues": [float(v) for v in cell.eigenvalues_mean],
            "selected": [None if s is None else float(s) for s in cell.selected],
            "failures": cell.failures,
        })
    return out

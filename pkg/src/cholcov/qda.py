"""Quadratic discriminant analysis with pluggable covariance estimators.

Built for the two-class sonar spectra task (60 frequency-band energies,
labels R/M) but usable with any two-class numeric dataset.  Precision
matrices and log-determinants come from the triangular factors of the
chosen covariance estimator, so no dense inversion ever happens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import estimators as est_mod
from . import selection as sel_mod
from .errors import (
    CholcovError,
    InsufficientData,
    ParseError,
    ShapeError,
    SingularCovariance,
)
from .estimators import DataMatrix, EstimatorSpec

SONAR_FEATURES = 60
TUNING_SPLITS = 10


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray      # (n, p)
    labels: np.ndarray        # (n,) ints in {0, 1}
    class_names: tuple = ("rock", "metal")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


@dataclass
class QdaModel:
    means: list               # per-class mean vectors
    precisions: list          # per-class Omega
    logdets: list             # per-class log|Omega|
    priors: np.ndarray
    selected: list            # per-class tuning parameter (or None)


def load_sonar(path) -> LabeledDataset:
    """Parse the UCI sonar file: 60 comma-separated reals then 'R'/'M'
    per line.  Rocks map to class 0, metal to class 1."""
    rows = []
    labels = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ShapeError(f"{path}: file is empty")
    for lineno, line in enumerate(lines, start=1):
        parts = [s.strip() for s in line.split(",")]
        if len(parts) != SONAR_FEATURES + 1:
            raise ParseError(
                f"expected {SONAR_FEATURES} values plus a label, got "
                f"{len(parts)} fields", line=lineno)
        try:
            rows.append([float(v) for v in parts[:-1]])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from exc
        tag = parts[-1].upper()
        if tag not in ("R", "M"):
            raise ParseError(f"unknown label {parts[-1]!r}", line=lineno)
        labels.append(0 if tag == "R" else 1)
    return LabeledDataset(features=np.asarray(rows, dtype=float),
                          labels=np.asarray(labels, dtype=int),
                          class_names=("rock", "metal"))


def _class_precision(features, spec: EstimatorSpec):
    data = est_mod.center(features)
    estimate = est_mod.fit(data, spec)
    try:
        omega, logdet = est_mod.precision_from_estimate(estimate)
    except CholcovError as exc:
        raise SingularCovariance(
            f"class covariance could not be inverted: {exc}") from exc
    return omega, logdet


def fit_qda(train: LabeledDataset, specs) -> QdaModel:
    """Fit per-class means, priors, and precisions.

    ``specs`` is either a single EstimatorSpec applied to both classes or
    a sequence of two (per-class tuning).
    """
    if isinstance(specs, EstimatorSpec):
        specs = [specs, specs]
    means, precisions, logdets, selected = [], [], [], []
    counts = []
    for cls in (0, 1):
        mask = train.labels == cls
        feats = train.features[mask]
        if feats.shape[0] < 2:
            raise InsufficientData(
                f"class {cls} has {feats.shape[0]} samples, need >= 2")
        counts.append(feats.shape[0])
        means.append(feats.mean(axis=0))
        omega, logdet = _class_precision(feats, specs[cls])
        precisions.append(omega)
        logdets.append(logdet)
        spec = specs[cls]
        selected.append(spec.k if spec.k is not None else spec.lam)
    priors = np.asarray(counts, dtype=float) / sum(counts)
    return QdaModel(means=means, precisions=precisions, logdets=logdets,
                    priors=priors, selected=selected)


def discriminant_scores(model: QdaModel, x):
    """Per-class scores 0.5 log|Omega| - 0.5 (x-mu)' Omega (x-mu) + log pi."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    scores = np.empty((x.shape[0], 2))
    for cls in (0, 1):
        dev = x - model.means[cls]
        quad = np.einsum("ij,jk,ik->i", dev, model.precisions[cls], dev)
        scores[:, cls] = (0.5 * model.logdets[cls] - 0.5 * quad
                          + np.log(model.priors[cls]))
    return scores


def classify(model: QdaModel, x):
    """argmax of the discriminant scores; ties go to class 0."""
    scores = discriminant_scores(model, x)
    single = np.asarray(x).ndim == 1
    labels = np.where(scores[:, 1] > scores[:, 0], 1, 0)
    return int(labels[0]) if single else labels


def _tune_class_spec(features, method, seed):
    """Per-class tuning for the banding methods; Frobenius criterion for
    the covariance side, validation likelihood for the precision side."""
    if method not in ("chol_banding", "inv_chol_banding", "sample_banding"):
        return EstimatorSpec(method)
    data = DataMatrix(values=features - features.mean(axis=0), centered=True)
    res = sel_mod.select_band_random_split(
        data, method, n_splits=TUNING_SPLITS, seed=seed)
    return EstimatorSpec(method, k=int(res.selected))


def loocv_error(data: LabeledDataset, method, master_seed=0):
    """Leave-one-out test error with per-fold, per-class tuning.

    Returns (error_rate, binomial_se, predictions) where predictions is
    a list of (index, true, predicted, score_0, score_1) tuples.
    """
    n = data.n
    if n < 4:
        raise InsufficientData("need at least 4 observations for LOOCV")
    wrong = 0
    predictions = []
    for i in range(n):
        keep = np.ones(n, dtype=bool)
        keep[i] = False
        train = LabeledDataset(features=data.features[keep],
                               labels=data.labels[keep],
                               class_names=data.class_names)
        specs = []
        for cls in (0, 1):
            feats = train.features[train.labels == cls]
            fold_seed = np.random.SeedSequence(
                master_seed, spawn_key=(i, cls)).generate_state(1)[0]
            specs.append(_tune_class_spec(feats, method, int(fold_seed)))
        model = fit_qda(train, specs)
        scores = discriminant_scores(model, data.features[i])[0]
        pred = 1 if scores[1] > scores[0] else 0
        truth = int(data.labels[i])
        wrong += int(pred != truth)
        predictions.append((i, truth, pred, float(scores[0]), float(scores[1])))
    rate = wrong / n
    se = math.sqrt(rate * (1.0 - rate) / n)
    return rate, se, predictions

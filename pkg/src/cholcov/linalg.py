"""Dense symmetric linear algebra kernels.

Everything here works on plain numpy arrays.  The central object is the
unit-triangular factorization M = L diag(d) L^T with L unit lower
triangular and d > 0, computed column by column so that structural zeros
in the input propagate exactly (not just to rounding) into the factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NoConvergence, NotPositiveDefinite


@dataclass(frozen=True)
class CholeskyFactors:
    """Unit lower-triangular factor plus positive diagonal.

    Holds (L, d) with M = L diag(d) L^T, or equally the (T, d) pair of a
    precision-form factorization Omega = T^T diag(1/d) T.
    """

    unit_lower: np.ndarray
    diag: np.ndarray

    @property
    def dim(self) -> int:
        return self.diag.shape[0]


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending; column i of ``vectors`` pairs with
    ``values[i]``."""

    values: np.ndarray
    vectors: np.ndarray


def _as_square(m):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def modified_cholesky(m, tol=None) -> CholeskyFactors:
    """Factor a symmetric positive definite matrix as L diag(d) L^T.

    Uses the sequential column-wise recursion
        d_jj = m_jj - sum_{u<j} l_ju^2 d_uu
        l_ij = (m_ij - sum_{u<j} l_iu l_ju d_uu) / d_jj,   i > j
    so exact zeros in leading row positions of ``m`` yield exact zeros in
    the factor.  Raises NotPositiveDefinite with the 1-based failing
    column if any pivot d_jj falls at or below ``tol``.
    """
    m = _as_square(m)
    p = m.shape[0]
    if tol is None:
        tol = 1e-12 * max(np.max(np.abs(np.diag(m))), 1.0)
    lower = np.eye(p)
    d = np.zeros(p)
    for j in range(p):
        d[j] = m[j, j] - np.dot(lower[j, :j] ** 2, d[:j])
        if d[j] <= tol:
            raise NotPositiveDefinite(column=j + 1, pivot=d[j])
        if j + 1 < p:
            lower[j + 1 :, j] = (
                m[j + 1 :, j] - lower[j + 1 :, :j] @ (lower[j, :j] * d[:j])
            ) / d[j]
    return CholeskyFactors(unit_lower=lower, diag=d)


def reconstruct(factors: CholeskyFactors) -> np.ndarray:
    """Multiply L diag(d) L^T back into a dense symmetric matrix."""
    lower = factors.unit_lower
    return lower @ (factors.diag[:, None] * lower.T)


def invert_unit_lower(t) -> np.ndarray:
    """Invert a unit lower-triangular matrix by forward substitution.

    The inverse of unit lower triangular is again unit lower triangular;
    no pivoting or conditioning concerns arise.
    """
    t = _as_square(t)
    p = t.shape[0]
    inv = np.eye(p)
    for i in range(1, p):
        # row i of the inverse: t[i, :i] @ inv[:i, :i] + inv[i, :i] = 0
        inv[i, :i] = -(t[i, :i] @ inv[:i, :i])
    return inv


def precision_factors(omega) -> CholeskyFactors:
    """Factor a positive definite matrix as Omega = T^T diag(1/d) T.

    Computed by flipping row/column order, running modified_cholesky, and
    flipping back, which preserves exact trailing-zero patterns in the
    columns of Omega (the precision-side analogue of the leading-zero
    property of modified_cholesky).
    """
    omega = _as_square(omega)
    flipped = omega[::-1, ::-1]
    f = modified_cholesky(flipped)
    t = f.unit_lower[::-1, ::-1].T
    d = 1.0 / f.diag[::-1]
    return CholeskyFactors(unit_lower=t, diag=d)


def sym_eigen(m, max_iter=100) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix.

    Backed by LAPACK's symmetric solver; results are re-sorted to
    descending eigenvalue order and each eigenvector's sign is fixed so
    its first non-negligible component is positive.
    """
    m = _as_square(m)
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NoConvergence(f"symmetric eigensolver failed: {exc}") from exc
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = vectors[:, order]
    scale = np.max(np.abs(vectors), axis=0)
    for i in range(vectors.shape[1]):
        col = vectors[:, i]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * max(scale[i], 1e-300))
        if nz.size and col[nz[0]] < 0:
            vectors[:, i] = -col
    return EigenDecomposition(values=values, vectors=vectors)


def operator_norm(m) -> float:
    """Matrix 2-norm: sqrt of the largest eigenvalue of M M^T."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimMismatch(f"expected a matrix, got shape {m.shape}")
    gram = m @ m.T
    values = sym_eigen(gram).values
    return float(np.sqrt(max(values[0], 0.0)))


def frobenius_norm(m) -> float:
    """sqrt of the sum of squared entries."""
    m = np.asarray(m, dtype=float)
    return float(np.sqrt(np.sum(m * m)))


def is_positive_definite(m, tol=None) -> bool:
    """True iff the LDL^T factorization succeeds with all pivots above
    ``tol`` (default 1e-12 times the largest diagonal entry)."""
    try:
        modified_cholesky(m, tol=tol)
    except NotPositiveDefinite:
        return False
    return True

"""Penalized least-squares solvers for a single regression.

Two penalties on the coefficient vector l of the regression
``min ||x - Z l||^2 + P(l)``:

* lasso: ``P(l) = lam * sum_t |l_t|``, solved by cyclic coordinate
  descent with soft thresholding;
* nested lasso: ratio penalty whose terms ``|l_t| / |l_{t+1}|`` force a
  contiguous-from-the-left zero pattern, solved by iteratively
  reweighted lasso.

Coefficients are ordered so that ``l[-1]`` multiplies the most recent
predictor (the one adjacent to the response in the variable ordering).
No intercept anywhere; responses and designs are centered upstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence

# Denominators in the nested penalty are floored here when reweighting,
# so a zeroed coefficient translates into a very large (not infinite)
# weight for its left neighbour.
DENOM_FLOOR = 1e-10

# A coefficient below this fraction of the largest magnitude counts as
# zero for the nested pattern.
ZERO_REL_TOL = 1e-8

LASSO_TOL = 1e-8
LASSO_MAX_CYCLES = 10_000
NESTED_MAX_OUTER = 500


@dataclass(frozen=True)
class PenalizedProblem:
    response: np.ndarray        # (n,)
    design: np.ndarray          # (n, m)
    lam: float
    penalty_kind: str           # "lasso" | "nested_lasso"


@dataclass
class SolverResult:
    coefficients: np.ndarray
    objective: float
    iterations: int
    converged: bool
    # filled only when objective tracing is requested; one entry per
    # coordinate update
    objective_trace: list = field(default_factory=list)


def _lasso_objective(x, z, coef, lam, weights=None):
    resid = x - z @ coef
    if weights is None:
        pen = lam * np.sum(np.abs(coef))
    else:
        pen = lam * np.sum(weights * np.abs(coef))
    return float(resid @ resid + pen)


def _cd_weighted_lasso(x, z, lam, weights, start, tol=LASSO_TOL,
                       max_cycles=LASSO_MAX_CYCLES, trace=None):
    """Cyclic coordinate descent for ||x - Z l||^2 + lam * sum w_t |l_t|.

    Coordinate t minimizer: soft-threshold the partial correlation at
    lam * w_t / 2 and divide by the column's squared norm.  Returns
    (coef, cycles, converged).
    """
    n, m = z.shape
    sq = np.einsum("ij,ij->j", z, z)
    coef = np.array(start, dtype=float, copy=True)
    resid = x - z @ coef
    for cycle in range(1, max_cycles + 1):
        max_delta = 0.0
        for t in range(m):
            if sq[t] == 0.0:
                continue
            old = coef[t]
            rho = z[:, t] @ resid + sq[t] * old
            thr = lam * weights[t] / 2.0
            new = np.sign(rho) * max(abs(rho) - thr, 0.0) / sq[t]
            if new != old:
                resid += z[:, t] * (old - new)
                coef[t] = new
            delta = abs(new - old)
            if delta > max_delta:
                max_delta = delta
            if trace is not None:
                trace.append(_lasso_objective(x, z, coef, lam, weights))
        if max_delta < tol:
            return coef, cycle, True
    return coef, max_cycles, False


def solve_lasso(prob: PenalizedProblem, start=None,
                record_objective=False) -> SolverResult:
    """Lasso regression by cyclic coordinate descent.

    Converges when the largest coefficient change over a full cycle drops
    below 1e-8; raises NoConvergence after 10,000 cycles.
    """
    x = np.asarray(prob.response, dtype=float)
    z = np.asarray(prob.design, dtype=float)
    m = z.shape[1]
    if start is None:
        start = np.zeros(m)
    trace = [] if record_objective else None
    weights = np.ones(m)
    coef, cycles, ok = _cd_weighted_lasso(x, z, prob.lam, weights, start,
                                          trace=trace)
    if not ok:
        raise NoConvergence(
            f"lasso coordinate descent did not converge in {LASSO_MAX_CYCLES} cycles"
        )
    obj = _lasso_objective(x, z, coef, prob.lam)
    return SolverResult(coefficients=coef, objective=obj, iterations=cycles,
                        converged=True,
                        objective_trace=trace if trace is not None else [])


def _nested_weights(coef, univariate_coef, dead):
    """Per-coefficient penalty weights for the local approximation of the
    ratio penalty, with denominators fixed at the current iterate.
    Coefficients already declared structurally zero (``dead``) get the
    floor weight so they stay pinned at zero."""
    m = coef.shape[0]
    w = np.empty(m)
    w[m - 1] = 1.0 / max(abs(univariate_coef), DENOM_FLOOR)
    for t in range(m - 1):
        w[t] = 1.0 / max(abs(coef[t + 1]), DENOM_FLOOR)
    w[dead] = 1.0 / DENOM_FLOOR
    return w


def nested_penalty_value(coef, univariate_coef):
    """Ratio penalty with 0/0 taken as 0 (and x/0 as +inf for x != 0)."""
    m = coef.shape[0]
    a = np.abs(coef)
    total = 0.0
    denom = abs(univariate_coef)
    for t in range(m - 1, -1, -1):
        num = a[t]
        if num == 0.0:
            pass  # 0/anything contributes 0, including 0/0
        elif denom == 0.0:
            return float("inf")
        else:
            total += num / denom
        denom = a[t]
    return total


def _enforce_nested_pattern(coef):
    """Zero out every coefficient left of the left-most structural zero,
    so the support is contiguous from the right."""
    a = np.abs(coef)
    top = a.max() if a.size else 0.0
    thr = ZERO_REL_TOL * top
    out = coef.copy()
    dead = False
    for t in range(coef.shape[0] - 1, -1, -1):
        if dead or a[t] <= thr:
            out[t] = 0.0
            dead = True
    return out


def solve_nested_lasso(prob: PenalizedProblem) -> SolverResult:
    """Nested-lasso regression by iteratively reweighted lasso.

    The scale-adjusted first term divides |l[-1]| by the univariate
    coefficient of the response on the last design column.  Denominators
    are frozen at the current iterate, the resulting weighted lasso is
    solved, and the loop runs to a fixed point of the coefficients.
    Warm-started from the plain lasso solution at the same lam.
    """
    x = np.asarray(prob.response, dtype=float)
    z = np.asarray(prob.design, dtype=float)
    m = z.shape[1]

    last = z[:, m - 1]
    sq_last = float(last @ last)
    c_uni = float(last @ x) / sq_last if sq_last > 0 else 0.0

    warm = solve_lasso(
        PenalizedProblem(response=x, design=z, lam=prob.lam,
                         penalty_kind="lasso"))
    coef = _enforce_nested_pattern(warm.coefficients)
    dead = coef == 0.0
    converged = False
    iters = 0
    for outer in range(1, NESTED_MAX_OUTER + 1):
        iters = outer
        w = _nested_weights(coef, c_uni, dead)
        new, _, ok = _cd_weighted_lasso(x, z, prob.lam, w, coef)
        if not ok:
            raise NoConvergence("inner weighted lasso did not converge")
        new = _enforce_nested_pattern(new)
        new_dead = dead | (new == 0.0)
        # support shrinkage is monotone, so the loop cannot cycle between
        # support sets; within a fixed support the reweighting contracts
        stable = (new_dead == dead).all()
        delta = np.max(np.abs(new - coef)) if new.size else 0.0
        scale = 1.0 + (np.max(np.abs(new)) if new.size else 0.0)
        coef, dead = new, new_dead
        if stable and delta < LASSO_TOL * scale:
            converged = True
            break
    if not converged:
        raise NoConvergence(
            f"nested lasso did not converge in {NESTED_MAX_OUTER} outer iterations"
        )
    resid = x - z @ coef
    obj = float(resid @ resid + prob.lam * nested_penalty_value(coef, c_uni))
    return SolverResult(coefficients=coef, objective=obj, iterations=iters,
                        converged=True)


def lambda_grid(lam_max, n_points=25, span=1e-4):
    """Log-spaced penalty grid from lam_max down to lam_max * span."""
    lam_max = max(float(lam_max), 1e-12)
    return np.geomspace(lam_max, lam_max * span, n_points)

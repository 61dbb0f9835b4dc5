import numpy as np
import pytest

from cholcov.penalty import (
    PenalizedProblem,
    lambda_grid,
    nested_penalty_value,
    solve_lasso,
    solve_nested_lasso,
)


def lasso_objective_grid(x, z, lam, centers, half_width, points=201, refinements=3):
    """Brute-force minimizer of the 2-coefficient lasso objective by
    repeated grid refinement around the best point."""
    gram = z.T @ z
    zx = z.T @ x
    xx = float(x @ x)
    best = np.asarray(centers, dtype=float)
    width = half_width
    for _ in range(refinements):
        g0 = np.linspace(best[0] - width, best[0] + width, points)
        g1 = np.linspace(best[1] - width, best[1] + width, points)
        a, b = np.meshgrid(g0, g1, indexing="ij")
        # ||x - Z l||^2 expanded through the Gram matrix
        quad = (gram[0, 0] * a * a + 2 * gram[0, 1] * a * b + gram[1, 1] * b * b)
        obj = xx - 2 * (zx[0] * a + zx[1] * b) + quad \
            + lam * (np.abs(a) + np.abs(b))
        i, j = np.unravel_index(np.argmin(obj), obj.shape)
        best = np.array([g0[i], g1[j]])
        width = 4 * width / points
    return best


def random_problem(rng, n=30, m=2):
    z = rng.standard_normal((n, m))
    coef = rng.standard_normal(m)
    x = z @ coef + 0.3 * rng.standard_normal(n)
    return x, z


class TestLasso:
    def test_lambda_zero_orthogonal_is_ols(self):
        rng = np.random.default_rng(0)
        q, _ = np.linalg.qr(rng.standard_normal((20, 3)))
        z = q * np.array([2.0, 1.0, 3.0])
        x = z @ np.array([1.5, -2.0, 0.5]) + 0.1 * rng.standard_normal(20)
        res = solve_lasso(PenalizedProblem(x, z, 0.0, "lasso"))
        ols = np.linalg.lstsq(z, x, rcond=None)[0]
        assert np.max(np.abs(res.coefficients - ols)) < 1e-10

    def test_kill_condition(self):
        rng = np.random.default_rng(1)
        x, z = random_problem(rng)
        lam = 2.0 * np.max(np.abs(z.T @ x)) + 1e-9
        res = solve_lasso(PenalizedProblem(x, z, lam, "lasso"))
        assert np.all(res.coefficients == 0.0)

    def test_grid_oracle(self):
        rng = np.random.default_rng(2)
        x, z = random_problem(rng)
        lam = 3.0
        res = solve_lasso(PenalizedProblem(x, z, lam, "lasso"))
        ols = np.linalg.lstsq(z, x, rcond=None)[0]
        grid = lasso_objective_grid(x, z, lam, ols, 1.0 + np.max(np.abs(ols)))
        assert np.max(np.abs(res.coefficients - grid)) < 1e-4

    def test_objective_monotone_per_update(self):
        rng = np.random.default_rng(3)
        x, z = random_problem(rng, n=25, m=4)
        res = solve_lasso(PenalizedProblem(x, z, 1.0, "lasso"),
                          record_objective=True)
        trace = np.asarray(res.objective_trace)
        assert np.all(np.diff(trace) <= 1e-10)

    def test_kkt_at_solution(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            x, z = random_problem(rng, n=40, m=5)
            lam = 2.0
            res = solve_lasso(PenalizedProblem(x, z, lam, "lasso"))
            r = x - z @ res.coefficients
            corr = z.T @ r
            for t in range(5):
                if res.coefficients[t] == 0.0:
                    assert abs(corr[t]) <= lam / 2 + 1e-6
                else:
                    target = np.sign(res.coefficients[t]) * lam / 2
                    assert corr[t] == pytest.approx(target, abs=1e-6)


class TestNestedLasso:
    def test_lambda_zero_is_ols(self):
        rng = np.random.default_rng(5)
        x, z = random_problem(rng, n=40, m=3)
        res = solve_nested_lasso(PenalizedProblem(x, z, 0.0, "nested_lasso"))
        ols = np.linalg.lstsq(z, x, rcond=None)[0]
        assert np.max(np.abs(res.coefficients - ols)) < 1e-6

    def test_huge_lambda_all_zero(self):
        rng = np.random.default_rng(6)
        x, z = random_problem(rng)
        res = solve_nested_lasso(PenalizedProblem(x, z, 1e8, "nested_lasso"))
        assert np.all(res.coefficients == 0.0)
        assert res.objective == pytest.approx(float(x @ x))

    def test_zero_pattern_contiguous(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            m = int(rng.integers(2, 7))
            x, z = random_problem(rng, n=30, m=m)
            lam = float(rng.uniform(0.5, 20.0))
            res = solve_nested_lasso(PenalizedProblem(x, z, lam, "nested_lasso"))
            coef = res.coefficients
            for t in range(m - 1):
                if coef[t + 1] == 0.0:
                    assert coef[t] == 0.0

    def test_penalty_value_zero_conventions(self):
        assert nested_penalty_value(np.zeros(3), 0.0) == 0.0
        assert nested_penalty_value(np.array([0.0, 0.0, 2.0]), 4.0) \
            == pytest.approx(0.5)
        assert nested_penalty_value(np.array([1.0, 0.0, 2.0]), 4.0) == np.inf


class TestSequentialGridOracle:
    def test_penalized_chol_matches_grids(self):
        # replicate the 3-variable penalized factorization step by step,
        # solving each penalized regression by brute-force grid search
        from cholcov.estimators import center, penalized_chol

        rng = np.random.default_rng(8)
        raw = rng.standard_normal((30, 3))
        raw[:, 1] += 0.8 * raw[:, 0]
        raw[:, 2] += 0.5 * raw[:, 1]
        data = center(raw)
        lam = 2.0
        est = penalized_chol(data, "lasso", lam)

        x = data.values
        e1 = x[:, 0]
        # j = 2: one coefficient, dense 1-D grid around the OLS value
        ols = (e1 @ x[:, 1]) / (e1 @ e1)
        grid = np.linspace(ols - 2 * abs(ols) - 1, ols + 2 * abs(ols) + 1, 400001)
        obj = (np.sum((x[:, 1][:, None] - np.outer(e1, grid)) ** 2, axis=0)
               + lam * np.abs(grid))
        l21 = grid[np.argmin(obj)]
        assert abs(est.factors.unit_lower[1, 0] - l21) < 1e-4
        e2 = x[:, 1] - l21 * e1
        # j = 3: two coefficients, refined 2-D grid
        z = np.column_stack([e1, e2])
        ols2 = np.linalg.lstsq(z, x[:, 2], rcond=None)[0]
        best = lasso_objective_grid(x[:, 2], z, lam, ols2,
                                    1.0 + np.max(np.abs(ols2)))
        assert np.max(np.abs(est.factors.unit_lower[2, :2] - best)) < 1e-4


def test_lambda_grid_shape():
    g = lambda_grid(10.0)
    assert len(g) == 25
    assert g[0] == pytest.approx(10.0)
    assert g[-1] == pytest.approx(1e-3)
    assert np.all(np.diff(g) < 0)

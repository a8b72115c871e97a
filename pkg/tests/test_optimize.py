import numpy as np
import pytest

from prmkit.errors import DomainError
from prmkit.optimize import minimize_lbfgs


def quadratic(A, b):
    def fg(x):
        r = A @ x - b
        return 0.5 * float(r @ r), A.T @ r

    return fg


class TestLbfgs:
    def test_quadratic_exact(self):
        rng = np.random.default_rng(1)
        A = rng.normal(0, 1, (12, 6)) + np.vstack([np.eye(6)] * 2)
        b = rng.normal(0, 1, 12)
        result = minimize_lbfgs(quadratic(A, b), np.zeros(6), gradient_tolerance=1e-10)
        expected, *_ = np.linalg.lstsq(A, b, rcond=None)
        assert result.converged
        np.testing.assert_allclose(result.x, expected, atol=1e-7)

    def test_rosenbrock(self):
        def fg(x):
            a, b = x
            f = (1 - a) ** 2 + 100 * (b - a**2) ** 2
            g = np.array([-2 * (1 - a) - 400 * a * (b - a**2), 200 * (b - a**2)])
            return float(f), g

        result = minimize_lbfgs(fg, np.array([-1.2, 1.0]), max_iterations=300)
        np.testing.assert_allclose(result.x, [1.0, 1.0], atol=1e-6)

    def test_memory_bound_respected(self):
        calls = []

        def fg(x):
            calls.append(x.copy())
            return float(x @ x), 2 * x

        result = minimize_lbfgs(fg, np.ones(4), memory=2)
        assert result.converged
        np.testing.assert_allclose(result.x, np.zeros(4), atol=1e-8)

    def test_non_finite_start(self):
        def fg(x):
            return float("nan"), x

        with pytest.raises(DomainError):
            minimize_lbfgs(fg, np.zeros(2))

    def test_iteration_cap(self):
        def fg(x):
            # valley with a slowly decaying gradient
            return float(np.sum(np.abs(x) ** 1.5)), 1.5 * np.sign(x) * np.sqrt(np.abs(x))

        result = minimize_lbfgs(fg, np.full(3, 4.0), max_iterations=3)
        assert result.iterations <= 3
        assert not result.converged

    def test_objective_never_increases_with_budget(self):
        rng = np.random.default_rng(5)
        A = rng.normal(0, 1, (20, 8))
        b = rng.normal(0, 1, 20)
        fg = quadratic(A, b)
        prev = None
        for budget in range(1, 30):
            result = minimize_lbfgs(fg, np.zeros(8), max_iterations=budget)
            if prev is not None:
                assert result.objective <= prev + 1e-12
            prev = result.objective

    def test_stall_detection_reports_stalled(self):
        # a function that flattens out at double precision quickly
        def fg(x):
            f = 1.0 + 1e-20 * float(x @ x)
            return f, 2e-20 * x + 1e-3 * np.ones_like(x)

        result = minimize_lbfgs(fg, np.ones(2), max_iterations=400)
        assert result.stalled or result.line_search_failed or result.converged
        assert result.iterations < 400

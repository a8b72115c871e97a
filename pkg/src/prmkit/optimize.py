"""Limited-memory BFGS with a weak-Wolfe line search.

Deterministic, dependency-free quasi-Newton minimizer: the search direction
comes from the standard two-loop recursion over the last ``memory``
curvature pairs, and step lengths are chosen by bisection bracketing until
both the Armijo (sufficient decrease) and curvature conditions hold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

FunGrad = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass
class MinimizeResult:
    x: np.ndarray
    objective: float
    gradient: np.ndarray
    iterations: int
    converged: bool
    line_search_failed: bool
    stalled: bool = False


def _two_loop(grad: np.ndarray, s_list: list[np.ndarray], y_list: list[np.ndarray]) -> np.ndarray:
    q = grad.copy()
    alphas = []
    rhos = [1.0 / float(y @ s) for s, y in zip(s_list, y_list)]
    for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rhos)):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if s_list:
        s, y = s_list[-1], y_list[-1]
        gamma = float(s @ y) / float(y @ y)
        q *= gamma
    for (s, y, rho), a in zip(zip(s_list, y_list, rhos), reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return q


def _wolfe_search(
    fun_grad: FunGrad,
    x: np.ndarray,
    f0: float,
    g0: np.ndarray,
    d: np.ndarray,
    c1: float,
    c2: float,
    max_trials: int = 60,
) -> tuple[float, float, np.ndarray, bool]:
    """Bisection bracketing for the weak Wolfe conditions.

    Returns (alpha, f, g, ok). Falls back to the last Armijo-satisfying
    point when the curvature condition cannot be met within the budget.
    """
    slope0 = float(g0 @ d)
    lo, hi = 0.0, np.inf
    alpha = 1.0
    armijo_best: tuple[float, float, np.ndarray] | None = None
    for _ in range(max_trials):
        f, g = fun_grad(x + alpha * d)
        if not np.isfinite(f) or f > f0 + c1 * alpha * slope0:
            hi = alpha
            alpha = 0.5 * (lo + hi)
        elif float(g @ d) < c2 * slope0:
            armijo_best = (alpha, f, g)
            lo = alpha
            alpha = 2.0 * alpha if np.isinf(hi) else 0.5 * (lo + hi)
        else:
            return alpha, f, g, True
    if armijo_best is not None:
        alpha, f, g = armijo_best
        return alpha, f, g, True
    return 0.0, f0, g0, False


def minimize_lbfgs(
    fun_grad: FunGrad,
    x0: np.ndarray,
    *,
    memory: int = 10,
    gradient_tolerance: float = 1e-8,
    max_iterations: int = 500,
    c1: float = 1e-4,
    c2: float = 0.9,
) -> MinimizeResult:
    """Minimize ``fun_grad`` starting from ``x0``.

    Convergence is declared when the gradient infinity norm drops to the
    tolerance. A failed line search, or an objective that stops decreasing
    at machine precision for several consecutive steps, returns the best
    iterate reached with ``converged=False``; the objective never increases
    across accepted iterations.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    f, g = fun_grad(x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise DomainError(f"objective is not finite at the starting point (f={f!r})")
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    iterations = 0
    ls_failed = False
    stagnant = 0
    stalled = False
    for iterations in range(1, max_iterations + 1):
        if float(np.max(np.abs(g))) <= gradient_tolerance:
            return MinimizeResult(x, f, g, iterations - 1, True, False)
        d = -_two_loop(g, s_hist, y_hist)
        if float(d @ g) >= 0.0:  # stale curvature; fall back to steepest descent
            d = -g
        alpha, f_new, g_new, ok = _wolfe_search(fun_grad, x, f, g, d, c1, c2)
        if not ok:
            ls_failed = True
            break
        if f - f_new <= 1e-14 * max(1.0, abs(f)):
            stagnant += 1
            if stagnant >= 8:  # progress lost in float rounding
                stalled = True
                x = x + alpha * d
                f, g = f_new, g_new
                break
        else:
            stagnant = 0
        s = alpha * d
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        x = x + s
        f, g = f_new, g_new
    converged = float(np.max(np.abs(g))) <= gradient_tolerance
    return MinimizeResult(x, f, g, iterations, converged, ls_failed, stalled)

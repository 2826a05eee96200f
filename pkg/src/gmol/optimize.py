"""Derivative-free maximization and finite-difference curvature."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize as _sopt

from .errors import EvaluationError, InitializationError

__all__ = ["OptimizerConfig", "OptResult", "nelder_mead", "numerical_hessian"]

Objective = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class OptimizerConfig:
    """Stopping rules and restart policy for :func:`nelder_mead`.

    ``f_tol`` bounds the spread of objective values over the simplex and
    ``x_tol`` the spread of its vertices; both must hold to stop.
    ``restarts`` caps how many times the simplex is rebuilt around the
    incumbent, and ``seed`` drives the restart jitter.
    """

    max_iter: int = 5000
    f_tol: float = 1e-10
    x_tol: float = 1e-9
    restarts: int = 5
    seed: int = 0
    step: float = 0.1

    def __post_init__(self):
        for name in ("max_iter", "f_tol", "x_tol", "step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")


@dataclass(frozen=True)
class OptResult:
    x_opt: np.ndarray
    f_opt: float
    converged: bool
    iterations: int
    restarts_used: int
    evaluations: int = 0


def _safe_neg(objective: Objective):
    def neg(x):
        v = objective(x)
        if v is None or not math.isfinite(v):
            return math.inf
        return -float(v)

    return neg


def _run(neg, simplex, cfg: OptimizerConfig):
    res = _sopt.minimize(
        neg,
        simplex[0],
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "maxiter": cfg.max_iter,
            "maxfev": 2 * cfg.max_iter,
            "xatol": cfg.x_tol,
            "fatol": cfg.f_tol,
            "adaptive": False,
        },
    )
    return res


def nelder_mead(objective: Objective, x0, cfg: OptimizerConfig = OptimizerConfig()) -> OptResult:
    """Maximize ``objective`` with restarted Nelder-Mead.

    The objective is negated and minimized with the classical coefficients
    (reflection 1, expansion 2, contraction 0.5, shrink 0.5). The first
    simplex places one vertex ``step * max(|x_i|, 1)`` along each axis.
    After convergence the simplex is rebuilt around the incumbent with 10%
    relative Gaussian jitter, up to ``cfg.restarts`` times, until a restart
    no longer improves the objective by more than ``f_tol``.

    Non-finite objective values are treated as infeasible points.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    d = x0.size
    neg = _safe_neg(objective)
    rng = np.random.default_rng(cfg.seed)

    scale = cfg.step * np.maximum(np.abs(x0), 1.0)
    simplex = np.vstack([x0, x0 + np.diag(scale)])
    if all(math.isinf(neg(v)) for v in simplex):
        raise InitializationError("objective is non-finite at every vertex of the initial simplex")

    res = _run(neg, simplex, cfg)
    best_x, best_f = np.asarray(res.x, dtype=float), float(res.fun)
    converged = bool(res.success)
    iterations = int(res.nit)
    evaluations = int(res.nfev)

    used = 0
    for _ in range(cfg.restarts):
        used += 1
        scale = cfg.step * np.maximum(np.abs(best_x), 1.0)
        simplex = np.vstack([best_x, best_x + scale * rng.standard_normal((d, d))])
        res = _run(neg, simplex, cfg)
        iterations += int(res.nit)
        evaluations += int(res.nfev)
        improved = float(res.fun) < best_f - cfg.f_tol
        if float(res.fun) <= best_f:
            best_x, best_f = np.asarray(res.x, dtype=float), float(res.fun)
            converged = bool(res.success) or converged
        if not improved:
            break

    return OptResult(
        x_opt=best_x,
        f_opt=-best_f,
        converged=converged and math.isfinite(best_f),
        iterations=iterations,
        restarts_used=used,
        evaluations=evaluations,
    )


def numerical_hessian(objective: Objective, x) -> np.ndarray:
    """Central-difference Hessian with steps ``max(1e-5, 1e-4 |x_i|)``.

    The result is symmetrized as ``(H + H.T) / 2``.

    Raises
    ------
    EvaluationError
        If the objective is non-finite at any stencil point.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.size
    h = np.maximum(1e-5, 1e-4 * np.abs(x))

    def f(v):
        val = objective(v)
        if val is None or not math.isfinite(val):
            raise EvaluationError(f"objective is non-finite at {v!r}")
        return float(val)

    f0 = f(x)
    H = np.empty((d, d))
    E = np.diag(h)
    for i in range(d):
        H[i, i] = (f(x + E[i]) - 2.0 * f0 + f(x - E[i])) / (h[i] * h[i])
        for j in range(i + 1, d):
            val = (
                f(x + E[i] + E[j]) - f(x + E[i] - E[j]) - f(x - E[i] + E[j]) + f(x - E[i] - E[j])
            ) / (4.0 * h[i] * h[j])
            H[i, j] = H[j, i] = val
    return 0.5 * (H + H.T)

"""GMOL regression for right-censored lifetimes.

Covariates enter through log links on both Lomax parameters::

    beta_i = exp(v_i . eta1),    tau_i = exp(v_i . eta2)

while ``alpha`` and ``lam`` are shared by all observations. Failures
contribute their log-density and censored observations their log-survival.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from . import core
from .core import GmolParams, SubModel
from .errors import DesignError, DomainError, EvaluationError, OptimizerError
from .fit import NEAR_ONE, CDF_CLAMP, moment_init
from .optimize import OptimizerConfig, OptResult, nelder_mead, numerical_hessian

__all__ = [
    "CensoredDesign",
    "RegParams",
    "RegFitResult",
    "systematic_components",
    "loglik_censored",
    "fit_regression",
    "lr_test",
    "quantile_residuals",
]

# tolerance on loglik(full) - loglik(nested) before it counts as an optimizer failure
LR_SLACK = 1e-6


@dataclass(frozen=True)
class CensoredDesign:
    """Observed times ``x``, failure indicators ``delta`` and covariate rows ``V``.

    ``V`` is n x r and normally carries a leading column of ones.
    """

    x: np.ndarray
    delta: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        delta = np.asarray(self.delta).ravel()
        V = np.asarray(self.V, dtype=float)
        if V.ndim == 1:
            V = V[:, None]
        if not (x.size == delta.size == V.shape[0]):
            raise DesignError("x, delta and V must have the same number of rows")
        if not np.all(np.isfinite(x)) or np.any(x <= 0):
            raise DesignError("times must be finite and > 0")
        if not np.all(np.isin(delta, (0, 1))):
            raise DesignError("delta must contain only 0 and 1")
        if not np.all(np.isfinite(V)):
            raise DesignError("covariates must be finite")
        r = V.shape[1]
        if np.linalg.matrix_rank(V) < r:
            raise DesignError("covariate matrix is rank deficient")
        if int(delta.sum()) < r + 1:
            raise DesignError(f"need at least {r + 1} observed failures, got {int(delta.sum())}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "delta", delta.astype(np.int8))
        object.__setattr__(self, "V", V)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def r(self) -> int:
        return self.V.shape[1]

    @property
    def failures(self) -> int:
        return int(self.delta.sum())


@dataclass(frozen=True)
class RegParams:
    alpha: float
    lam: float
    eta1: tuple[float, ...]
    eta2: tuple[float, ...]

    def __post_init__(self):
        GmolParams(self.alpha, self.lam, 1.0, 1.0)
        eta1 = tuple(float(v) for v in np.ravel(self.eta1))
        eta2 = tuple(float(v) for v in np.ravel(self.eta2))
        if len(eta1) != len(eta2) or not eta1:
            raise DomainError("eta1 and eta2 must be non-empty and of equal length")
        object.__setattr__(self, "eta1", eta1)
        object.__setattr__(self, "eta2", eta2)

    @property
    def r(self) -> int:
        return len(self.eta1)

    def as_vector(self) -> np.ndarray:
        return np.array((self.alpha, self.lam) + self.eta1 + self.eta2)

    @classmethod
    def from_vector(cls, v) -> "RegParams":
        v = np.asarray(v, dtype=float)
        r = (v.size - 2) // 2
        return cls(v[0], v[1], tuple(v[2 : 2 + r]), tuple(v[2 + r :]))

    def names(self) -> tuple[str, ...]:
        return ("alpha", "lam") + _eta_names(self.r)


def _eta_names(r: int) -> tuple[str, ...]:
    sep = "" if r <= 10 else "_"
    return tuple(f"eta1{sep}{j}" for j in range(r)) + tuple(f"eta2{sep}{j}" for j in range(r))


@dataclass
class RegFitResult:
    """Outcome of :func:`fit_regression`.

    ``se`` follows ``param_names``; ``wald_p`` covers only the eta
    coefficients, in the order ``eta1`` then ``eta2``.
    """

    model: SubModel
    zeta_hat: RegParams
    se: np.ndarray
    wald_p: np.ndarray
    loglik: float
    converged: bool
    n: int
    param_names: tuple[str, ...]
    cov: np.ndarray | None = None
    opt: OptResult | None = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.param_names)

    @property
    def estimates(self) -> np.ndarray:
        full = dict(zip(self.zeta_hat.names(), self.zeta_hat.as_vector()))
        return np.array([full[name] for name in self.param_names])


def systematic_components(zeta: RegParams, v) -> tuple:
    """``(beta_i, tau_i)`` for one covariate row or a matrix of rows."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != zeta.r:
        raise DomainError(f"covariate row has length {v.shape[-1]}, expected {zeta.r}")
    with np.errstate(over="ignore"):
        beta = np.exp(v @ np.array(zeta.eta1))
        tau = np.exp(v @ np.array(zeta.eta2))
    if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(tau))):
        raise EvaluationError("exp link overflowed")
    if np.any(beta <= 0) or np.any(tau <= 0):
        raise EvaluationError("exp link underflowed to 0")
    return beta, tau


def _loglik_reg(x, fail, V, alpha, lam, eta1, eta2) -> float:
    if not (0.0 < alpha <= 1.0 and 0.0 <= lam <= 1.0):
        return -math.inf
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        log_beta = V @ eta1
        log_tau = V @ eta2
        beta = np.exp(log_beta)
        tau = np.exp(log_tau)
        L = np.log1p(x / beta)
        log_s = -tau * L
        G = -np.expm1(log_s)
        cens = ~fail
        # failures: log(tau beta^tau) + log(bracket) - (tau+1) log(beta + x) - 2 log(alpha + (1-alpha) G)
        Gf = G[fail]
        bracket = (1.0 - alpha) * (1.0 - lam) * Gf * Gf + 2.0 * alpha * (1.0 - lam) * Gf + alpha * lam
        tf = tau[fail]
        lbf = log_beta[fail]
        ll_fail = (
            np.sum(log_tau[fail] + tf * lbf)
            + np.sum(np.log(bracket))
            - np.sum((tf + 1.0) * (lbf + L[fail]))
            - 2.0 * np.sum(np.log(alpha + (1.0 - alpha) * Gf))
        )
        Gc = G[cens]
        ll_cens = np.sum(
            log_s[cens] + np.log(alpha + (1.0 - lam) * Gc) - np.log(alpha + (1.0 - alpha) * Gc)
        )
        val = ll_fail + ll_cens
    return float(val) if math.isfinite(val) else -math.inf


def loglik_censored(zeta: RegParams, d: CensoredDesign) -> float:
    """Censored-data log-likelihood; ``-inf`` when not finite."""
    if zeta.r != d.r:
        raise DomainError(f"zeta has {zeta.r} coefficients per link, design has {d.r} columns")
    return _loglik_reg(
        d.x, d.delta.astype(bool), d.V, zeta.alpha, zeta.lam, np.array(zeta.eta1), np.array(zeta.eta2)
    )


# -- fitting -----------------------------------------------------------------


def _free_names(model: SubModel, r: int) -> tuple[str, ...]:
    return model.free_names + _eta_names(r)


def _restrict(zeta: RegParams, model: SubModel) -> RegParams:
    if model is SubModel.MOL:
        return RegParams(zeta.alpha, 1.0, zeta.eta1, zeta.eta2)
    if model is SubModel.LOMAX:
        return RegParams(1.0, 1.0, zeta.eta1, zeta.eta2)
    return zeta


def _to_u(zeta: RegParams, model: SubModel) -> np.ndarray:
    head = []
    for name in model.free_names:
        v = min(max(getattr(zeta, name), 1.0 - NEAR_ONE), NEAR_ONE)
        head.append(special.logit(v))
    return np.array(head + list(zeta.eta1) + list(zeta.eta2))


def _from_u(u: np.ndarray, model: SubModel, r: int):
    m = model.n_shape
    alpha = lam = 1.0
    if model is SubModel.GMOL:
        alpha, lam = float(special.expit(u[0])), float(special.expit(u[1]))
    elif model is SubModel.MOL:
        alpha = float(special.expit(u[0]))
    return alpha, lam, u[m : m + r], u[m + r : m + 2 * r]


def _default_starts(d: CensoredDesign, model: SubModel, cfg: OptimizerConfig) -> list[RegParams]:
    fail_x = d.x[d.delta == 1]
    tau0, beta0 = moment_init(fail_x if fail_x.size > 1 else d.x)
    # V need not have an intercept column; least squares on constant targets
    e1, *_ = np.linalg.lstsq(d.V, np.full(d.n, math.log(beta0)), rcond=None)
    e2, *_ = np.linalg.lstsq(d.V, np.full(d.n, math.log(tau0)), rcond=None)
    base = RegParams(1.0, 1.0, tuple(e1), tuple(e2))
    if model is SubModel.LOMAX:
        return [base]
    lomax = fit_regression(d, SubModel.LOMAX, cfg=cfg, compute_se=False).zeta_hat
    if model is SubModel.MOL:
        return [
            RegParams(0.9, 1.0, base.eta1, base.eta2),
            RegParams(NEAR_ONE, 1.0, lomax.eta1, lomax.eta2),
        ]
    mol = fit_regression(d, SubModel.MOL, cfg=cfg, compute_se=False).zeta_hat
    starts = [
        RegParams(0.9, 0.9, lomax.eta1, lomax.eta2),
        RegParams(mol.alpha, NEAR_ONE, mol.eta1, mol.eta2),
    ]
    # best few (alpha, lam) grid points at the MOL links, as cheap extra starts
    fail = d.delta.astype(bool)
    scored = []
    for a in (0.05, 0.2, 0.5, 0.8):
        for lam in (0.05, 0.3, 0.6, 0.9):
            ll = _loglik_reg(d.x, fail, d.V, a, lam, np.array(mol.eta1), np.array(mol.eta2))
            scored.append((ll, a, lam))
    scored.sort(key=lambda t: -t[0])
    starts += [RegParams(a, lam, mol.eta1, mol.eta2) for ll, a, lam in scored[:2] if math.isfinite(ll)]
    return starts


def fit_regression(
    d: CensoredDesign,
    model: SubModel | str = SubModel.GMOL,
    init: RegParams | None = None,
    cfg: OptimizerConfig | None = None,
    compute_se: bool = True,
) -> RegFitResult:
    """Maximum likelihood fit of the censored regression.

    ``alpha`` and ``lam`` are optimized on the logit scale, the eta
    coefficients as they are. Without ``init`` the search starts from a
    moment-matched Lomax fit and cascades through the nested sub-models.
    Wald p-values ``2 (1 - Phi(|eta / se|))`` are reported for the eta
    coefficients only.
    """
    model = SubModel.parse(model)
    cfg = cfg or OptimizerConfig()
    r = d.r
    if init is not None and init.r != r:
        raise DomainError(f"init has {init.r} coefficients per link, design has {r} columns")
    names = _free_names(model, r)
    x, fail, V = d.x, d.delta.astype(bool), d.V

    def objective(u):
        return _loglik_reg(x, fail, V, *_from_u(u, model, r))

    starts = [_restrict(init, model)] if init is not None else _default_starts(d, model, cfg)
    best: OptResult | None = None
    for start in starts:
        res = nelder_mead(objective, _to_u(start, model), cfg)
        if best is None or res.f_opt > best.f_opt:
            best = res
    if best is None or not math.isfinite(best.f_opt):
        raise OptimizerError("no finite optimum found", {"starts": starts})

    alpha, lam, eta1, eta2 = _from_u(best.x_opt, model, r)
    if alpha <= 0.0:
        raise OptimizerError("alpha collapsed to 0", {"x_opt": best.x_opt})
    zeta = RegParams(alpha, lam, tuple(eta1), tuple(eta2))

    se = np.full(len(names), np.nan)
    cov = None
    if compute_se:
        jac = np.array(
            [getattr(zeta, n) * (1.0 - getattr(zeta, n)) for n in model.free_names] + [1.0] * (2 * r)
        )
        try:
            info = -numerical_hessian(objective, best.x_opt)
            np.linalg.cholesky(info)
            cov = np.linalg.inv(info) * np.outer(jac, jac)
            se = np.sqrt(np.diag(cov))
        except (np.linalg.LinAlgError, ArithmeticError):
            cov = None
    m = model.n_shape
    eta_hat = np.asarray(best.x_opt[m:], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        wald_p = 2.0 * stats.norm.sf(np.abs(eta_hat / se[m:]))

    return RegFitResult(
        model=model,
        zeta_hat=zeta,
        se=se,
        wald_p=wald_p,
        loglik=best.f_opt,
        converged=best.converged,
        n=d.n,
        param_names=names,
        cov=cov,
        opt=best,
    )


def lr_test(full, nested, df: int) -> tuple[float, float]:
    """Likelihood-ratio test of a nested restriction.

    Works with any pair of fit results exposing ``loglik``. The statistic
    is clamped at zero; a nested fit that beats the full one by more than
    ``1e-6`` in log-likelihood signals an optimizer problem.
    """
    if df < 1:
        raise DomainError(f"df must be >= 1, got {df}")
    diff = full.loglik - nested.loglik
    if diff < -LR_SLACK:
        raise OptimizerError(
            "nested model has higher log-likelihood than the full model",
            {"full": full.loglik, "nested": nested.loglik},
        )
    stat = max(0.0, 2.0 * diff)
    return stat, lr_pvalue(stat, df)


def lr_pvalue(stat: float, df: int) -> float:
    """Upper chi-square tail probability."""
    return float(stats.chi2.sf(stat, df))


def _conditional_cdf(zeta: RegParams, d: CensoredDesign) -> np.ndarray:
    beta, tau = systematic_components(zeta, d.V)
    return core._cdf(d.x, zeta.alpha, zeta.lam, tau, beta)


def quantile_residuals(fit: RegFitResult, d: CensoredDesign) -> tuple[np.ndarray, np.ndarray]:
    """Normal quantiles of the fitted conditional CDF at every observation.

    Returns ``(qr, delta)``; censored observations are kept and identified
    by ``delta == 0``.
    """
    u = np.clip(_conditional_cdf(fit.zeta_hat, d), CDF_CLAMP, 1.0 - CDF_CLAMP)
    return special.ndtri(u), d.delta.copy()

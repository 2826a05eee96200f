"""Maximum likelihood for iid samples, goodness of fit and model comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import core
from .core import GmolParams, SubModel
from .errors import DegenerateComparisonError, DomainError, OptimizerError
from .optimize import OptimizerConfig, OptResult, nelder_mead, numerical_hessian
from .specfun import kolmogorov_p, std_normal_cdf

__all__ = [
    "IidSample",
    "FitResult",
    "GofReport",
    "loglik_iid",
    "fit_mle",
    "gof_stats",
    "gof_from_cdf",
    "information_criteria",
    "vuong_glr",
    "moment_init",
]

# boundary stand-in for alpha = 1 or lam = 1 when a start sits on a sub-model
NEAR_ONE = 1.0 - 1e-9
CDF_CLAMP = 1e-15


@dataclass(frozen=True)
class IidSample:
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        if x.size == 0:
            raise DomainError("sample is empty")
        if not np.all(np.isfinite(x)) or np.any(x <= 0):
            raise DomainError("observations must be finite and > 0")
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.size


@dataclass
class FitResult:
    """Outcome of :func:`fit_mle`.

    ``se`` holds one standard error per entry of ``param_names``; it is
    all-NaN when the observed information could not be inverted.
    """

    model: SubModel
    theta_hat: GmolParams
    se: np.ndarray
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
        return np.array([getattr(self.theta_hat, name) for name in self.param_names])


@dataclass(frozen=True)
class GofReport:
    w_star: float
    a_star: float
    ks: float
    ks_p: float
    aic: float
    caic: float
    bic: float
    hqic: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


def _loglik(x, alpha, lam, tau, beta) -> float:
    """Log-likelihood written as the sum of the four grouped terms."""
    if not (0.0 < alpha <= 1.0 and 0.0 <= lam <= 1.0 and tau > 0 and beta > 0):
        return -math.inf
    n = x.size
    L = np.log1p(x / beta)  # log(beta + x) - log(beta)
    G = -np.expm1(-tau * L)
    bracket = (1.0 - alpha) * (1.0 - lam) * G * G + 2.0 * alpha * (1.0 - lam) * G + alpha * lam
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (
            n * (math.log(tau) + tau * math.log(beta))
            + np.sum(np.log(bracket))
            - (tau + 1.0) * (n * math.log(beta) + np.sum(L))
            - 2.0 * np.sum(np.log(alpha + (1.0 - alpha) * G))
        )
    return float(val) if math.isfinite(val) else -math.inf


def loglik_iid(theta: GmolParams, s: IidSample) -> float:
    """Log-likelihood of ``theta`` for an iid sample; ``-inf`` when not finite."""
    return _loglik(s.x, *theta.as_tuple())


# -- parameter transforms ------------------------------------------------------


def _param_names(model: SubModel) -> tuple[str, ...]:
    return model.free_names + ("tau", "beta")


def _to_unconstrained(theta: GmolParams, model: SubModel) -> np.ndarray:
    u = []
    for name in model.free_names:
        v = min(max(getattr(theta, name), 1.0 - NEAR_ONE), NEAR_ONE)
        u.append(special.logit(v))
    u += [math.log(theta.tau), math.log(theta.beta)]
    return np.array(u)


def _from_unconstrained(u: np.ndarray, model: SubModel) -> tuple[float, float, float, float]:
    alpha = lam = 1.0
    if model is SubModel.GMOL:
        alpha, lam = special.expit(u[0]), special.expit(u[1])
    elif model is SubModel.MOL:
        alpha = special.expit(u[0])
    return float(alpha), float(lam), math.exp(u[-2]), math.exp(u[-1])


def _jacobian_diag(theta: GmolParams, model: SubModel) -> np.ndarray:
    """d(natural)/d(unconstrained) for each free parameter."""
    d = [getattr(theta, n) * (1.0 - getattr(theta, n)) for n in model.free_names]
    return np.array(d + [theta.tau, theta.beta])


def moment_init(x: np.ndarray) -> tuple[float, float]:
    """Lomax ``(tau, beta)`` matching the sample mean and variance.

    Uses ``var/mean^2 = tau/(tau-2)``; when the sample is not
    over-dispersed relative to that relation, falls back to ``tau = 10``
    with the mean matched.
    """
    m = float(np.mean(x))
    v = float(np.var(x, ddof=1)) if x.size > 1 else 0.0
    r = v / (m * m) if m > 0 else 0.0
    tau = 2.0 * r / (r - 1.0) if r > 1.0 + 1e-9 else 10.0
    tau = min(max(tau, 2.05), 1e3)
    return tau, m * (tau - 1.0)


def _default_starts(s: IidSample, model: SubModel, cfg: OptimizerConfig) -> list[GmolParams]:
    tau0, beta0 = moment_init(s.x)
    if model is SubModel.LOMAX:
        return [GmolParams(1.0, 1.0, tau0, beta0)]
    lomax = fit_mle(s, SubModel.LOMAX, cfg=cfg, compute_se=False).theta_hat
    if model is SubModel.MOL:
        return [
            GmolParams(0.9, 1.0, tau0, beta0),
            GmolParams(NEAR_ONE, 1.0, lomax.tau, lomax.beta),
        ]
    mol = fit_mle(s, SubModel.MOL, cfg=cfg, compute_se=False).theta_hat
    return [
        GmolParams(0.9, 0.9, tau0, beta0),
        GmolParams(mol.alpha, NEAR_ONE, mol.tau, mol.beta),
    ] + _profile_starts(s.x, lomax, cfg)


PROFILE_ALPHAS = (0.95, 0.7, 0.5, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005)
PROFILE_LAMBDAS = (0.02, 0.2, 0.5, 0.8, 0.98)


def _profile_starts(x, lomax: GmolParams, cfg: OptimizerConfig, keep: int = 3) -> list[GmolParams]:
    """Best points of a coarse profile likelihood over (alpha, lam).

    Stands in for a global search: the GMOL likelihood is often multimodal,
    with competing optima near alpha = 1 and at small alpha. For each grid
    point (tau, beta) are optimized loosely; within a row of fixed lam the
    search is warm started from the previous alpha so it follows the ridge.
    """
    loose = OptimizerConfig(max_iter=400, f_tol=1e-6, x_tol=1e-4, restarts=0, seed=cfg.seed)
    found = []
    for lam in PROFILE_LAMBDAS:
        u = np.array([math.log(lomax.tau), math.log(lomax.beta)])
        for a in PROFILE_ALPHAS:

            def prof(v, a=a, lam=lam):
                return _loglik(x, a, lam, math.exp(v[0]), math.exp(v[1]))

            res = nelder_mead(prof, u, loose)
            if math.isfinite(res.f_opt):
                u = res.x_opt
                found.append((res.f_opt, GmolParams(a, lam, math.exp(u[0]), math.exp(u[1]))))
    found.sort(key=lambda item: -item[0])
    return [th for _, th in found[:keep]]


def fit_mle(
    s: IidSample,
    model: SubModel | str = SubModel.GMOL,
    init: GmolParams | None = None,
    cfg: OptimizerConfig | None = None,
    compute_se: bool = True,
) -> FitResult:
    """Maximum likelihood fit of a (sub-)model to an iid sample.

    Optimization runs in unconstrained coordinates: logit for ``alpha``
    and ``lam``, log for ``tau`` and ``beta``. Without ``init`` the search
    starts from a method-of-moments Lomax guess with ``alpha = lam = 0.9``
    and, for the larger models, additionally from the fitted nested
    sub-model, so the result never falls below the nested optimum.

    Standard errors come from the inverse observed information in the
    unconstrained coordinates, mapped back by the delta method.
    """
    model = SubModel.parse(model)
    cfg = cfg or OptimizerConfig()
    names = _param_names(model)
    if s.n < len(names) + 1:
        raise DomainError(f"need at least {len(names) + 1} observations, got {s.n}")
    x = s.x

    def objective(u):
        return _loglik(x, *_from_unconstrained(u, model))

    starts = [model.restrict(init)] if init is not None else _default_starts(s, model, cfg)
    best: OptResult | None = None
    for start in starts:
        res = nelder_mead(objective, _to_unconstrained(start, model), cfg)
        if best is None or res.f_opt > best.f_opt:
            best = res
    if best is None or not math.isfinite(best.f_opt):
        raise OptimizerError("no finite optimum found", {"starts": starts})

    alpha, lam, tau, beta = _from_unconstrained(best.x_opt, model)
    if alpha <= 0.0:
        raise OptimizerError("alpha collapsed to 0", {"x_opt": best.x_opt})
    theta = GmolParams(alpha, lam, tau, beta)

    se = np.full(len(names), np.nan)
    cov = None
    if compute_se:
        cov = _delta_cov(objective, best.x_opt, _jacobian_diag(theta, model))
        if cov is not None:
            se = np.sqrt(np.diag(cov))

    return FitResult(
        model=model,
        theta_hat=theta,
        se=se,
        loglik=best.f_opt,
        converged=best.converged,
        n=s.n,
        param_names=names,
        cov=cov,
        opt=best,
    )


def _delta_cov(objective, u_opt, jac) -> np.ndarray | None:
    """Covariance of natural parameters, or None if the information is singular."""
    try:
        H = numerical_hessian(objective, u_opt)
        info = -H
        np.linalg.cholesky(info)
        cov_u = np.linalg.inv(info)
    except (np.linalg.LinAlgError, ArithmeticError):
        return None
    cov = cov_u * np.outer(jac, jac)
    if not np.all(np.isfinite(cov)) or np.any(np.diag(cov) < 0):
        return None
    return cov


# -- adequacy ------------------------------------------------------------------


def information_criteria(loglik: float, k: int, n: int) -> dict[str, float]:
    aic = 2.0 * k - 2.0 * loglik
    caic = aic + 2.0 * k * (k + 1) / (n - k - 1) if n - k - 1 > 0 else math.inf
    return {
        "aic": aic,
        "caic": caic,
        "bic": k * math.log(n) - 2.0 * loglik,
        "hqic": 2.0 * k * math.log(math.log(n)) - 2.0 * loglik if n > 1 else math.nan,
    }


def gof_from_cdf(u, loglik: float, k: int) -> GofReport:
    """Adequacy statistics from fitted CDF values at the observations."""
    u = np.sort(np.clip(np.asarray(u, dtype=float), CDF_CLAMP, 1.0 - CDF_CLAMP))
    n = u.size
    i = np.arange(1, n + 1)
    w2 = 1.0 / (12.0 * n) + np.sum((u - (2 * i - 1) / (2.0 * n)) ** 2)
    a2 = -n - np.sum((2 * i - 1) * (np.log(u) + np.log(1.0 - u[::-1]))) / n
    ks = float(np.max(np.maximum(i / n - u, u - (i - 1) / n)))
    crit = information_criteria(loglik, k, n)
    return GofReport(
        w_star=float(w2 * (1.0 + 0.5 / n)),
        a_star=float(a2 * (1.0 + 0.75 / n + 2.25 / n**2)),
        ks=ks,
        ks_p=kolmogorov_p(ks, n),
        **crit,
    )


def gof_stats(fit: FitResult, s: IidSample) -> GofReport:
    """Cramér-von Mises, Anderson-Darling, KS and information criteria for a fit."""
    u = core.cdf(s.x, fit.theta_hat)
    return gof_from_cdf(u, fit.loglik, fit.k)


def vuong_glr(fitA: FitResult, fitB: FitResult, s: IidSample) -> tuple[float, float]:
    """Vuong's normal test on per-observation log-density differences.

    A positive statistic favours ``fitA``; the p-value is two-sided.
    """
    diff = core.logpdf(s.x, fitA.theta_hat) - core.logpdf(s.x, fitB.theta_hat)
    sd = float(np.std(diff))
    if not sd > 1e-14 * max(1.0, float(np.max(np.abs(diff)))):
        raise DegenerateComparisonError("log-likelihood differences have zero spread")
    stat = math.sqrt(s.n) * float(np.mean(diff)) / sd
    p = 2.0 * float(std_normal_cdf(-abs(stat)))
    return stat, p

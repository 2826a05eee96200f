"""Linear representation of the GMOL density and the properties derived from it.

The density expands as a signed mixture of Lomax densities sharing the
scale ``beta``::

    f(x) = g(x; tau, beta) + sum_k phi_k g(x; (k+1) tau, beta)

Moments, incomplete moments and the generating function then follow from
the corresponding Lomax quantities term by term.

Two routes to ``phi_k`` are provided. :func:`phi_from_rho` follows the
double sum over the exponentiated-G coefficients ``rho_j``; that sum only
converges for ``alpha > 1/2``. :func:`mixture_rep` uses the resummed
coefficients

    phi_0 = alpha - lam,    phi_k = alpha (lam - alpha) (1 - alpha)**(k-1),  k >= 1,

which are the Taylor coefficients of ``f/g`` in powers of the Lomax
survival and exist for every ``alpha`` in (0, 1]. Where both routes
converge they agree (see the tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import core
from .core import GmolParams, LomaxParams
from .errors import AccuracyError, DomainError, MomentError
from .specfun import kummer_1f1, log_gamma, upper_incomplete_beta

__all__ = [
    "SeriesAccuracy",
    "MixtureRep",
    "omega",
    "rho",
    "phi_from_rho",
    "mixture_rep",
    "moment",
    "incomplete_moment",
    "lorenz",
    "bonferroni",
    "bowley_skewness",
    "moors_kurtosis",
    "mgf",
    "mgf_mixture",
    "mgf_kummer_diagnostic",
]


@dataclass(frozen=True)
class SeriesAccuracy:
    tail_tol: float = 1e-10
    j_max: int = 500

    def __post_init__(self):
        if not self.tail_tol > 0:
            raise DomainError(f"tail_tol must be > 0, got {self.tail_tol}")
        if self.j_max < 1:
            raise DomainError(f"j_max must be >= 1, got {self.j_max}")


DEFAULT_SERIES = SeriesAccuracy()


@dataclass(frozen=True)
class MixtureRep:
    """Coefficients of the Lomax-mixture expansion.

    ``tail_bound`` bounds the sup-norm error of the truncated density
    expansion.
    """

    phi: np.ndarray
    tau_star: np.ndarray
    base: LomaxParams
    tail_bound: float

    def __post_init__(self):
        if len(self.phi) != len(self.tau_star):
            raise DomainError("phi and tau_star must have equal length")

    def __len__(self) -> int:
        return len(self.phi)

    def pdf(self, x) -> np.ndarray:
        """Reconstruct the density from the truncated expansion."""
        x = np.asarray(x, dtype=float)
        tau, beta = self.base.tau, self.base.beta
        total = core._lomax_pdf(x, tau, beta)
        for phi_k, ts in zip(self.phi, self.tau_star):
            total = total + phi_k * core._lomax_pdf(x, ts, beta)
        return total


def _check_generator(alpha: float, lam: float) -> None:
    GmolParams(alpha, lam, 1.0, 1.0)


def omega(i: int, j: int, alpha: float, lam: float) -> float:
    if i < 0 or not (0 <= j <= i + 1):
        raise DomainError(f"need i >= 0 and 0 <= j <= i+1, got i={i}, j={j}")
    return (-1) ** j * (lam - alpha) * (1.0 - alpha) ** i * math.comb(i + 1, j)


def rho(j: int, alpha: float, lam: float, acc: SeriesAccuracy = DEFAULT_SERIES) -> float:
    """Sum of ``omega(i, j)`` over ``i >= max(j - 1, 0)``.

    The summand is ``C(i+1, j) (1-alpha)^i`` up to a constant; once the term
    ratio ``r_i = (1-alpha)(i+2)/(i+2-j)`` drops below one it keeps
    decreasing, so the remaining tail is at most ``t_i r_i / (1 - r_i)``.
    Summation stops when that bound falls below ``tail_tol`` relative to
    the partial sum; the outer sum for ``phi_k`` multiplies small
    ``rho_j`` by large binomial weights, so an absolute floor is not enough.
    """
    if j < 0:
        raise DomainError(f"j must be >= 0, got {j}")
    _check_generator(alpha, lam)
    if lam == alpha:
        return 0.0
    q = 1.0 - alpha
    start = 0 if j < 2 else j - 1
    if q == 0.0:
        return omega(0, j, alpha, lam) if start == 0 else 0.0
    total = 0.0
    for i in range(start, start + acc.j_max):
        term = omega(i, j, alpha, lam)
        total += term
        r = q * (i + 2) / (i + 2 - j)
        if r < 1.0:
            tail = abs(term) * r / (1.0 - r)
            if tail <= acc.tail_tol * abs(total):
                return total
    raise AccuracyError(f"rho_{j} did not converge within {acc.j_max} terms (alpha={alpha})")


def phi_from_rho(k: int, alpha: float, lam: float, acc: SeriesAccuracy = DEFAULT_SERIES) -> float:
    """``phi_k`` by the double sum ``(-1)^k/(k+1) sum_{j>=k} (j+1) C(j,k) rho_j``.

    ``rho_j`` behaves like ``((1-alpha)/alpha)^j``, so the outer sum
    diverges unless ``alpha > 1/2``.

    Raises
    ------
    AccuracyError
        For ``alpha <= 1/2`` or when ``j_max`` terms do not suffice.
    """
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    _check_generator(alpha, lam)
    ratio = (1.0 - alpha) / alpha
    if ratio >= 1.0:
        raise AccuracyError(f"the rho-series for phi_k diverges for alpha <= 1/2 (alpha={alpha})")
    total = 0.0
    for j in range(k, k + acc.j_max):
        term = (j + 1) * math.comb(j, k) * rho(j, alpha, lam, acc)
        total += term
        r = ratio * (j + 2) / (j + 1 - k)  # growth of (j+1) C(j,k) ratio^j
        if r < 1.0 and abs(term) * r / (1.0 - r) < acc.tail_tol * max(1.0, abs(total)):
            return (-1) ** k * total / (k + 1)
    raise AccuracyError(f"phi_{k} did not converge within {acc.j_max} terms")


def _phi_closed(k: np.ndarray, alpha: float, lam: float) -> np.ndarray:
    k = np.asarray(k)
    q = 1.0 - alpha
    rest = alpha * (lam - alpha) * q ** np.maximum(k - 1, 0)
    return np.where(k == 0, alpha - lam, rest)


def _abs_phi_tail(K: int, alpha: float, lam: float) -> float:
    """``sum_{k >= K} |phi_k|`` in closed form (K >= 1)."""
    return abs(lam - alpha) * (1.0 - alpha) ** (K - 1)


def _n_terms(alpha: float, lam: float, bound, acc: SeriesAccuracy) -> int:
    """Smallest K in [1, j_max] with ``bound(K) < tail_tol``; K terms are kept."""
    if lam == alpha:
        return 0
    for K in range(1, acc.j_max + 1):
        if bound(K) < acc.tail_tol:
            return K
    raise AccuracyError(
        f"mixture series needs more than j_max={acc.j_max} terms (alpha={alpha}, lam={lam})"
    )


def mixture_rep(theta: GmolParams, acc: SeriesAccuracy = DEFAULT_SERIES) -> MixtureRep:
    """Truncated Lomax-mixture coefficients for ``theta``.

    The number of terms is chosen so the sup-norm error of the density
    expansion, ``sum_{k>=K} |phi_k| (k+1) tau / beta``, is below
    ``acc.tail_tol``.
    """
    alpha, lam, tau, beta = theta.as_tuple()
    q = 1.0 - alpha
    scale = alpha * abs(lam - alpha) * tau / beta

    def density_tail(K):
        # sum_{k>=K} (k+1) q^(k-1), closed form for K >= 1
        if q == 0.0:
            return 0.0 if K >= 2 else 2.0 * scale
        s = q ** (K - 1) * (K + 1 - K * q) / (1.0 - q) ** 2
        return scale * s

    K = _n_terms(alpha, lam, density_tail, acc)
    k = np.arange(K)
    phi = _phi_closed(k, alpha, lam).astype(float)
    return MixtureRep(
        phi=phi,
        tau_star=(k + 1.0) * tau,
        base=theta.base,
        tail_bound=float(density_tail(K)) if K else 0.0,
    )


def _lomax_moment(p: float, tau: float, beta: float) -> float:
    return math.exp(p * math.log(beta) + log_gamma(tau - p) + log_gamma(p + 1) - log_gamma(tau))


def _check_moment(p, tau):
    if p < 1 or int(p) != p:
        raise DomainError(f"p must be an integer >= 1, got {p}")
    if not p < tau:
        raise MomentError(f"moment of order {p} does not exist for tau={tau}")


def moment(p: int, theta: GmolParams, acc: SeriesAccuracy = DEFAULT_SERIES) -> float:
    """Raw moment ``E[X^p]`` from the Lomax moments of the mixture components."""
    alpha, lam, tau, beta = theta.as_tuple()
    _check_moment(p, tau)
    base = _lomax_moment(p, tau, beta)
    # each component moment is at most the base moment
    K = _n_terms(alpha, lam, lambda K: base * _abs_phi_tail(K, alpha, lam), acc)
    phi = _phi_closed(np.arange(K), alpha, lam)
    total = base
    for k in range(K):
        total += phi[k] * _lomax_moment(p, (k + 1) * tau, beta)
    return total


def incomplete_moment(
    p: int, s: float, theta: GmolParams, acc: SeriesAccuracy = DEFAULT_SERIES
) -> float:
    """``int_0^s x^p f(x) dx`` through upper incomplete beta functions.

    For a Lomax(t, beta) component the integral equals
    ``t beta^p B_z(t - p, p + 1)`` with ``z = beta / (beta + s)``.
    """
    alpha, lam, tau, beta = theta.as_tuple()
    _check_moment(p, tau)
    s = float(s)
    if not s > 0:
        raise DomainError(f"s must be > 0, got {s}")
    z = beta / (beta + s)
    bp = beta**p

    def component(t):
        return t * bp * upper_incomplete_beta(z, t - p, p + 1)

    base = _lomax_moment(p, tau, beta)
    K = _n_terms(alpha, lam, lambda K: base * _abs_phi_tail(K, alpha, lam), acc)
    phi = _phi_closed(np.arange(K), alpha, lam)
    total = component(tau)
    for k in range(K):
        total += phi[k] * component((k + 1) * tau)
    return total


def lorenz(nu, theta: GmolParams, acc: SeriesAccuracy = DEFAULT_SERIES):
    """Lorenz curve ``m_1(Q(nu)) / E[X]``; needs ``tau > 1``."""
    if not theta.tau > 1:
        raise MomentError(f"the mean does not exist for tau={theta.tau}")
    nu_arr = np.atleast_1d(np.asarray(nu, dtype=float))
    if np.any(~((nu_arr > 0) & (nu_arr < 1))):
        raise DomainError("nu must lie in (0, 1)")
    mean = moment(1, theta, acc)
    qs = core.quantile(nu_arr, theta)
    out = np.array([incomplete_moment(1, float(s), theta, acc) / mean for s in np.atleast_1d(qs)])
    return out[0] if np.ndim(nu) == 0 else out


def bonferroni(nu, theta: GmolParams, acc: SeriesAccuracy = DEFAULT_SERIES):
    """Bonferroni curve ``L(nu) / nu``."""
    return lorenz(nu, theta, acc) / np.asarray(nu, dtype=float)


def _quartile_spread(q):
    return q(0.75) - q(0.25)


def bowley_skewness(theta: GmolParams, q=None) -> float:
    """Quartile skewness ``[Q(3/4) - 2 Q(1/2) + Q(1/4)] / [Q(3/4) - Q(1/4)]``.

    ``q`` overrides the quantile function (used to check the formula on
    synthetic quantiles).
    """
    q = q or (lambda u: float(core.quantile(u, theta)))
    return (q(0.75) - 2.0 * q(0.5) + q(0.25)) / _quartile_spread(q)


def moors_kurtosis(theta: GmolParams, q=None) -> float:
    """Octile kurtosis ``[Q(7/8) - Q(5/8) + Q(3/8) - Q(1/8)] / [Q(3/4) - Q(1/4)]``."""
    q = q or (lambda u: float(core.quantile(u, theta)))
    return (q(0.875) - q(0.625) + q(0.375) - q(0.125)) / _quartile_spread(q)


def _check_t(t):
    t = float(t)
    if not t < 0:
        raise DomainError(f"the generating function needs t < 0, got {t}")
    return t


def _quad_mgf(density, t):
    val, _ = integrate.quad(
        lambda x: math.exp(t * x) * density(x), 0.0, math.inf, epsabs=0.0, epsrel=1e-11, limit=200
    )
    return val


def mgf(t: float, theta: GmolParams) -> float:
    """``E[exp(tX)]`` for ``t < 0`` by adaptive quadrature of the density."""
    t = _check_t(t)
    a, l, tau, beta = theta.as_tuple()
    return _quad_mgf(lambda x: float(core._pdf(x, a, l, tau, beta)), t)


def mgf_mixture(t: float, theta: GmolParams, acc: SeriesAccuracy = DEFAULT_SERIES) -> float:
    """``E[exp(tX)]`` from the Lomax generating functions of the mixture components."""
    t = _check_t(t)
    alpha, lam, tau, beta = theta.as_tuple()

    def lomax_mgf(ts):
        return _quad_mgf(lambda x: float(core._lomax_pdf(x, ts, beta)), t)

    # each component gf lies in (0, 1]
    K = _n_terms(alpha, lam, lambda K: _abs_phi_tail(K, alpha, lam), acc)
    phi = _phi_closed(np.arange(K), alpha, lam)
    total = lomax_mgf(tau)
    for k in range(K):
        total += phi[k] * lomax_mgf((k + 1) * tau)
    return total


def _lomax_mgf_kummer(t: float, tau: float, beta: float) -> float:
    """Lomax gf as ``tau U(1, 1 - tau, -beta t)`` expanded through 1F1.

    Valid for non-integer ``tau``:
    ``1F1(1, 1-tau; z) + tau Gamma(-tau) z^tau e^z`` with ``z = -beta t``.
    """
    z = -beta * t
    sign = 1.0 if math.floor(-tau) % 2 == 0 else -1.0  # sign of Gamma(-tau)
    tail = sign * math.exp(math.log(tau) + math.lgamma(-tau) + tau * math.log(z) + z)
    return kummer_1f1(1.0, 1.0 - tau, z) + tail


def _lomax_mgf_printed(t: float, tau: float, beta: float) -> float:
    z = -beta * t
    return kummer_1f1(1.0, 1.0 - tau, z) / tau + math.exp(z)


def mgf_kummer_diagnostic(
    t: float, theta: GmolParams, acc: SeriesAccuracy = DEFAULT_SERIES
) -> dict:
    """Compare Kummer-function expressions of the gf with quadrature.

    Returns a dict with the quadrature value (``quadrature``), the
    closed-form value built from ``tau U(1, 1-tau, -beta t)`` per mixture
    component (``kummer``), the component form ``1F1(1, 1-tau; z)/tau + e^z``
    (``kummer_as_printed``), and the absolute discrepancies of both against
    quadrature. Entries are NaN where a component hits an integer shape or
    the series limits.
    """
    t = _check_t(t)
    alpha, lam, tau, beta = theta.as_tuple()
    K = _n_terms(alpha, lam, lambda K: _abs_phi_tail(K, alpha, lam), acc)
    phi = _phi_closed(np.arange(K), alpha, lam)
    truth = mgf(t, theta)

    def combine(component):
        try:
            total = component(tau)
            for k in range(K):
                total += phi[k] * component((k + 1) * tau)
            return total
        except (ArithmeticError, ValueError):
            return math.nan

    kummer = combine(lambda ts: _lomax_mgf_kummer(t, ts, beta))
    printed = combine(lambda ts: _lomax_mgf_printed(t, ts, beta))
    return {
        "quadrature": truth,
        "kummer": kummer,
        "kummer_as_printed": printed,
        "kummer_error": abs(kummer - truth),
        "kummer_as_printed_error": abs(printed - truth),
    }

"""Distribution functions of the GMOL family and its nested sub-models.

The GMOL CDF applies the transform ``F = [lam G + (1-lam) G^2] / [alpha + (1-alpha) G]``
to the Lomax CDF ``G``. Everything here is written in terms of the Lomax
survival ``S = 1 - G = (beta / (beta + x))**tau`` evaluated in log space, which
keeps the upper tail accurate:

* ``F = G [lam + (1-lam) G] / [alpha + (1-alpha) G]``
* ``1 - F = S [alpha + (1-lam) G] / [alpha + (1-alpha) G]``

Functions accept scalars or arrays and return the same shape.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RangeError

__all__ = [
    "GmolParams",
    "LomaxParams",
    "SubModel",
    "lomax_cdf",
    "lomax_pdf",
    "gmo_transform",
    "cdf",
    "pdf",
    "logpdf",
    "survival",
    "logsf",
    "hrf",
    "quantile",
    "sample",
]

# below this |1 - lam| the quantile uses the Marshall-Olkin closed form
LAMBDA_LIMIT_TOL = 1e-10


@dataclass(frozen=True)
class LomaxParams:
    tau: float
    beta: float

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise DomainError(f"tau must be finite and > 0, got {self.tau}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be finite and > 0, got {self.beta}")


@dataclass(frozen=True)
class GmolParams:
    """Parameter vector ``(alpha, lam, tau, beta)``.

    ``alpha`` lies in (0, 1], ``lam`` in [0, 1]; ``tau`` is the Lomax shape
    and ``beta`` its scale (same units as the data).
    """

    alpha: float
    lam: float
    tau: float
    beta: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not (0.0 <= self.lam <= 1.0):
            raise DomainError(f"lam must lie in [0, 1], got {self.lam}")
        LomaxParams(self.tau, self.beta)

    @property
    def base(self) -> LomaxParams:
        return LomaxParams(self.tau, self.beta)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.lam, self.tau, self.beta)


class SubModel(enum.Enum):
    """Nested members of the family and the parameters each one frees."""

    GMOL = "gmol"
    MOL = "mol"
    LOMAX = "lomax"

    @property
    def free_names(self) -> tuple[str, ...]:
        return {
            SubModel.GMOL: ("alpha", "lam"),
            SubModel.MOL: ("alpha",),
            SubModel.LOMAX: (),
        }[self]

    @property
    def n_shape(self) -> int:
        """Number of free generator parameters (alpha and/or lam)."""
        return len(self.free_names)

    def restrict(self, theta: GmolParams) -> GmolParams:
        """Project ``theta`` onto this sub-model by fixing its constrained parameters."""
        if self is SubModel.MOL:
            return GmolParams(theta.alpha, 1.0, theta.tau, theta.beta)
        if self is SubModel.LOMAX:
            return GmolParams(1.0, 1.0, theta.tau, theta.beta)
        return theta

    @classmethod
    def parse(cls, name: "str | SubModel") -> "SubModel":
        if isinstance(name, SubModel):
            return name
        try:
            return cls(name.lower())
        except ValueError:
            raise DomainError(f"unknown model {name!r}; choose from gmol, mol, lomax") from None


def _as_x(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("x must be >= 0")
    return x


def _out(a: np.ndarray):
    return a[()] if a.ndim == 0 else a


# -- raw kernels: parameters unchecked, x checked by callers ---------------------


def _log_lomax_sf(x, tau, beta):
    return -tau * np.log1p(x / beta)


def _lomax_pieces(x, tau, beta):
    """Return (S, G) with both sides computed without cancellation."""
    log_s = _log_lomax_sf(x, tau, beta)
    return np.exp(log_s), -np.expm1(log_s)


def _lomax_pdf(x, tau, beta):
    return tau / beta * np.exp(-(tau + 1.0) * np.log1p(x / beta))


def _lomax_logpdf(x, tau, beta):
    return np.log(tau) - np.log(beta) - (tau + 1.0) * np.log1p(x / beta)


def _cdf(x, alpha, lam, tau, beta):
    _, G = _lomax_pieces(x, tau, beta)
    # alpha + (1 - alpha) can round above or below 1 at G = 1
    return np.minimum(G * (lam + (1.0 - lam) * G) / (alpha + (1.0 - alpha) * G), 1.0)


def _logsf(x, alpha, lam, tau, beta):
    log_s = _log_lomax_sf(x, tau, beta)
    G = -np.expm1(log_s)
    return log_s + np.log(alpha + (1.0 - lam) * G) - np.log(alpha + (1.0 - alpha) * G)


def _sf(x, alpha, lam, tau, beta):
    S, G = _lomax_pieces(x, tau, beta)
    return S * (alpha + (1.0 - lam) * G) / (alpha + (1.0 - alpha) * G)


def _shape_factor(G, alpha, lam):
    """dF/dG for the generator: ratio of the GMOL density to the Lomax density."""
    num = (1.0 - alpha) * (1.0 - lam) * G * G + 2.0 * alpha * (1.0 - lam) * G + alpha * lam
    den = alpha + (1.0 - alpha) * G
    return num / (den * den)


def _pdf(x, alpha, lam, tau, beta):
    _, G = _lomax_pieces(x, tau, beta)
    return _lomax_pdf(x, tau, beta) * _shape_factor(G, alpha, lam)


def _logpdf(x, alpha, lam, tau, beta):
    _, G = _lomax_pieces(x, tau, beta)
    num = (1.0 - alpha) * (1.0 - lam) * G * G + 2.0 * alpha * (1.0 - lam) * G + alpha * lam
    den = alpha + (1.0 - alpha) * G
    return _lomax_logpdf(x, tau, beta) + np.log(num) - 2.0 * np.log(den)


def _generator_inverse(u, alpha, lam):
    """Solve ``F(G) = u`` for G in [0, 1].

    The quadratic ``(1-lam) G^2 + (lam - (1-alpha) u) G - alpha u = 0`` is
    solved in the cancellation-free form; at ``lam = 1`` it degenerates to
    the Marshall-Olkin inverse ``alpha u / (1 - (1-alpha) u)``.
    """
    u = np.asarray(u, dtype=float)
    if abs(1.0 - lam) < LAMBDA_LIMIT_TOL:
        return alpha * u / (1.0 - (1.0 - alpha) * u)
    a2 = 1.0 - lam
    b1 = lam - (1.0 - alpha) * u
    root = np.sqrt(b1 * b1 + 4.0 * a2 * alpha * u)
    with np.errstate(divide="ignore", invalid="ignore"):
        G = np.where(
            b1 >= 0.0,
            2.0 * alpha * u / (b1 + root),
            (root - b1) / (2.0 * a2),
        )
    return np.clip(G, 0.0, 1.0)


def _quantile(u, alpha, lam, tau, beta):
    G = _generator_inverse(u, alpha, lam)
    # beta * ((1 - G)^(-1/tau) - 1), written with log1p/expm1
    with np.errstate(divide="ignore"):
        return beta * np.expm1(-np.log1p(-G) / tau)


# -- public API ------------------------------------------------------------------


def lomax_cdf(x, p: LomaxParams):
    x = _as_x(x)
    return _out(_lomax_pieces(x, p.tau, p.beta)[1])


def lomax_pdf(x, p: LomaxParams):
    x = _as_x(x)
    return _out(_lomax_pdf(x, p.tau, p.beta))


def gmo_transform(g, alpha: float, lam: float):
    """Apply the generator transform to baseline CDF values ``g`` in [0, 1]."""
    GmolParams(alpha, lam, 1.0, 1.0)
    g = np.asarray(g, dtype=float)
    if np.any((g < 0) | (g > 1)) or np.any(np.isnan(g)):
        raise DomainError("g must lie in [0, 1]")
    return _out((lam * g + (1.0 - lam) * g * g) / (alpha + (1.0 - alpha) * g))


def cdf(x, theta: GmolParams):
    x = _as_x(x)
    return _out(_cdf(x, *theta.as_tuple()))


def pdf(x, theta: GmolParams):
    x = _as_x(x)
    return _out(_pdf(x, *theta.as_tuple()))


def logpdf(x, theta: GmolParams):
    x = _as_x(x)
    return _out(_logpdf(x, *theta.as_tuple()))


def survival(x, theta: GmolParams):
    x = _as_x(x)
    return _out(_sf(x, *theta.as_tuple()))


def logsf(x, theta: GmolParams):
    x = _as_x(x)
    return _out(_logsf(x, *theta.as_tuple()))


def hrf(x, theta: GmolParams):
    """Hazard rate ``pdf / survival``.

    Raises
    ------
    RangeError
        If the survival function underflows to zero at any ``x``.
    """
    x = _as_x(x)
    sf = _sf(x, *theta.as_tuple())
    if np.any(sf <= 0.0):
        raise RangeError("survival underflowed to 0; hazard is not representable")
    return _out(_pdf(x, *theta.as_tuple()) / sf)


def quantile(u, theta: GmolParams):
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0.0) & (u < 1.0))):
        raise DomainError("quantile requires 0 < u < 1")
    return _out(_quantile(u, *theta.as_tuple()))


def sample(
    n: int,
    theta: GmolParams,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Draw ``n`` variates by inverse transform.

    Uniforms come from numpy's PCG64 generator, either a fresh one seeded
    with ``seed`` or the caller-owned ``rng``. The same seed always gives
    the same draws.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if rng is None:
        rng = np.random.default_rng(seed)
    u = rng.random(n)
    # random() is on [0, 1); the zero draw maps to the support boundary
    u = np.where(u == 0.0, np.finfo(float).tiny, u)
    return _quantile(u, *theta.as_tuple())

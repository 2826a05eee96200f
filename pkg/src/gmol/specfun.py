"""Special functions used by the distribution properties.

Log-gamma comes from the standard library and the incomplete beta and
normal quantile are backed by ``scipy.special``; the confluent
hypergeometric series and the Kolmogorov tail sum are evaluated here so
their truncation behaviour is under our control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import AccuracyError, DomainError

__all__ = [
    "Accuracy",
    "log_gamma",
    "log_beta",
    "upper_incomplete_beta",
    "kummer_1f1",
    "std_normal_cdf",
    "std_normal_quantile",
    "kolmogorov_p",
]

# 1F1 is only summed directly up to this |z|; beyond it cancellation ruins the series
KUMMER_MAX_ABS_Z = 50.0


@dataclass(frozen=True)
class Accuracy:
    abs_tol: float = 1e-12
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_ACCURACY = Accuracy()


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"log_gamma requires finite x > 0, got {x}")
    return math.lgamma(x)


def log_beta(a: float, b: float) -> float:
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def upper_incomplete_beta(z: float, a: float, b: float) -> float:
    r"""Upper incomplete beta integral :math:`\int_z^1 t^{a-1}(1-t)^{b-1}\,dt`.

    Computed as the complete beta function times the complement of the
    regularized lower incomplete beta (scipy's continued-fraction
    evaluation), so no subtraction of nearly equal numbers is involved.
    """
    z, a, b = float(z), float(a), float(b)
    if not (0.0 <= z <= 1.0):
        raise DomainError(f"z must lie in [0, 1], got {z}")
    if not (a > 0 and b > 0):
        raise DomainError(f"a and b must be > 0, got a={a}, b={b}")
    if z == 1.0:
        return 0.0
    return math.exp(log_beta(a, b)) * float(special.betaincc(a, b, z))


def kummer_1f1(a: float, gamma: float, z: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Confluent hypergeometric function 1F1(a; gamma; z) by its power series.

    Terms follow the recurrence ``t_{j+1} = t_j (a+j) z / ((gamma+j)(j+1))``.
    Summation stops once the terms are past their peak and the latest one
    is below ``acc.abs_tol`` relative to ``max(1, |sum|)``.

    Raises
    ------
    DomainError
        If ``gamma`` is zero or a negative integer.
    AccuracyError
        If ``|z|`` exceeds 50 or the series has not settled within
        ``acc.max_terms`` terms.
    """
    a, gamma, z = float(a), float(gamma), float(z)
    if gamma <= 0 and gamma == math.floor(gamma):
        raise DomainError(f"gamma must not be a non-positive integer, got {gamma}")
    if abs(z) > KUMMER_MAX_ABS_Z:
        raise AccuracyError(f"|z| = {abs(z)} exceeds the direct-series limit {KUMMER_MAX_ABS_Z}")
    term = 1.0
    total = 1.0
    for j in range(acc.max_terms):
        term *= (a + j) * z / ((gamma + j) * (j + 1))
        total += term
        if not math.isfinite(total):
            raise AccuracyError("1F1 series overflowed")
        # terms can still grow while j < |z| or while gamma + j is near zero
        settled = j + 1 > abs(z) and abs(gamma + j) > 1.0
        if term == 0.0 or (settled and abs(term) <= acc.abs_tol * max(1.0, abs(total))):
            return total
    raise AccuracyError(f"1F1 series did not converge in {acc.max_terms} terms")


def std_normal_cdf(x):
    """Standard normal CDF via the complementary error function."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * special.erfc(-x / math.sqrt(2.0))
    return out[()] if out.ndim == 0 else out


def std_normal_quantile(u):
    """Inverse standard normal CDF for ``u`` strictly inside (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0.0) & (u < 1.0))):
        raise DomainError("std_normal_quantile requires 0 < u < 1")
    out = special.ndtri(u)
    return out[()] if out.ndim == 0 else out


def kolmogorov_p(d: float, n: int, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Asymptotic Kolmogorov-Smirnov p-value ``P(sqrt(n) D > sqrt(n) d)``.

    Uses the alternating series ``2 sum (-1)^(k-1) exp(-2 k^2 n d^2)`` when
    it converges quickly. For small ``n d^2`` the equivalent theta-function
    form of the limiting CDF is summed instead, because the alternating
    series needs thousands of terms there.
    """
    d = float(d)
    n = int(n)
    if d < 0 or not math.isfinite(d):
        raise DomainError(f"d must be finite and >= 0, got {d}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    lam2 = n * d * d
    if lam2 == 0.0:
        return 1.0
    if lam2 >= 0.5:
        total = 0.0
        for k in range(1, acc.max_terms + 1):
            term = math.exp(-2.0 * k * k * lam2)
            total += term if k % 2 else -term
            if term < acc.abs_tol:
                break
        p = 2.0 * total
    else:
        # 1 - p = sqrt(2 pi)/lam * sum_k exp(-(2k-1)^2 pi^2 / (8 lam^2))
        lam = math.sqrt(lam2)
        cdf = 0.0
        for k in range(1, acc.max_terms + 1):
            term = math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8.0 * lam2))
            cdf += term
            if term < acc.abs_tol:
                break
        p = 1.0 - math.sqrt(2.0 * math.pi) / lam * cdf
    return min(1.0, max(0.0, p))

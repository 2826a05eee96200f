"""Generalized Marshall-Olkin Lomax (GMOL) distribution toolkit."""

from .core import GmolParams, LomaxParams, SubModel, cdf, hrf, logpdf, pdf, quantile, sample, survival
from .fit import FitResult, GofReport, IidSample, fit_mle, gof_stats, loglik_iid, vuong_glr
from .regression import CensoredDesign, RegFitResult, RegParams, fit_regression, lr_test, quantile_residuals

__all__ = [
    "GmolParams",
    "LomaxParams",
    "SubModel",
    "cdf",
    "hrf",
    "logpdf",
    "pdf",
    "quantile",
    "sample",
    "survival",
    "FitResult",
    "GofReport",
    "IidSample",
    "fit_mle",
    "gof_stats",
    "loglik_iid",
    "vuong_glr",
    "CensoredDesign",
    "RegFitResult",
    "RegParams",
    "fit_regression",
    "lr_test",
    "quantile_residuals",
]

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from gmol.errors import AccuracyError, DomainError
from gmol.specfun import (
    Accuracy,
    kolmogorov_p,
    kummer_1f1,
    log_beta,
    log_gamma,
    std_normal_cdf,
    std_normal_quantile,
    upper_incomplete_beta,
)

mp.mp.dps = 50

# frozen from 50-digit mpmath evaluations
LOG_GAMMA_HALF = 0.57236494292470008707  # ln sqrt(pi)
KUMMER_1_3_2 = 2.1945280494653251136  # 1F1(1; 3; 2) = (e^2 - 3)/2
NORMAL_Q_975 = 1.9599639845400542355


class TestLogGamma:
    def test_known_values(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-15)

    def test_half_matches_high_precision(self):
        assert abs(log_gamma(0.5) - LOG_GAMMA_HALF) < 1e-15
        assert LOG_GAMMA_HALF == pytest.approx(float(mp.log(mp.sqrt(mp.pi))), rel=1e-16)

    @pytest.mark.parametrize("x", np.geomspace(1e-3, 1e3, 25))
    def test_relative_error_on_range(self, x):
        ref = float(mp.loggamma(mp.mpf(x)))
        assert abs(log_gamma(x) - ref) <= 1e-13 * max(1.0, abs(ref))

    @pytest.mark.parametrize("bad", [0.0, -1.0, -0.5, math.inf, math.nan])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            log_gamma(bad)

    def test_log_beta(self):
        assert math.exp(log_beta(2.0, 3.0)) == pytest.approx(1 / 12, rel=1e-14)


class TestUpperIncompleteBeta:
    def test_examples(self):
        assert upper_incomplete_beta(0.0, 2.0, 3.0) == pytest.approx(1 / 12, abs=1e-12)
        assert upper_incomplete_beta(1.0, 2.5, 0.7) == 0.0
        assert upper_incomplete_beta(0.5, 1.0, 1.0) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("z,a,b", [(0.3, 0.5, 2.0), (0.9, 3.0, 0.25), (0.01, 7.0, 1.5), (0.6, 1.2, 4.0)])
    def test_against_mpmath(self, z, a, b):
        ref = float(mp.betainc(a, b, z, 1))
        assert abs(upper_incomplete_beta(z, a, b) - ref) <= 1e-10

    @pytest.mark.parametrize("a,b", [(0.5, 2.0), (2.0, 3.0), (4.0, 0.6)])
    def test_lower_part_matches_quadrature(self, a, b):
        full = upper_incomplete_beta(0.0, a, b)
        for z in (0.1, 0.4, 0.8):
            lower, _ = integrate.quad(lambda t: t ** (a - 1) * (1 - t) ** (b - 1), 0, z, epsabs=1e-13)
            assert abs(full - upper_incomplete_beta(z, a, b) - lower) < 1e-8

    @given(st.floats(0.05, 10), st.floats(0.05, 10), st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=60, deadline=None)
    def test_decreasing_in_z(self, a, b, z1, z2):
        lo, hi = sorted((z1, z2))
        assert upper_incomplete_beta(lo, a, b) >= upper_incomplete_beta(hi, a, b) - 1e-14

    @pytest.mark.parametrize("args", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, -2)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            upper_incomplete_beta(*args)


class TestKummer:
    def test_zero_argument(self):
        assert kummer_1f1(1.0, 2.0, 0.0) == 1.0

    def test_against_series_oracle(self):
        oracle = mp.nsum(lambda j: mp.rf(1, j) / mp.rf(3, j) * mp.mpf(2) ** j / mp.factorial(j), [0, mp.inf])
        assert float(oracle) == pytest.approx(KUMMER_1_3_2, rel=1e-16)
        assert kummer_1f1(1.0, 3.0, 2.0) == pytest.approx(KUMMER_1_3_2, rel=1e-13)

    @pytest.mark.parametrize("a", [0.3, 1.0, 2.5])
    @pytest.mark.parametrize("z", np.linspace(-10, 10, 9))
    def test_equal_parameters_give_exp(self, a, z):
        assert kummer_1f1(a, a, z) == pytest.approx(math.exp(z), rel=1e-10, abs=1e-10)

    @pytest.mark.parametrize("a,g,z", [(1.0, -0.5, 3.0), (2.0, 1.7, -4.0), (0.5, 0.25, 20.0)])
    def test_against_mpmath(self, a, g, z):
        assert kummer_1f1(a, g, z) == pytest.approx(float(mp.hyp1f1(a, g, z)), rel=1e-11)

    @pytest.mark.parametrize("g", [0.0, -1.0, -3.0])
    def test_nonpositive_integer_gamma(self, g):
        with pytest.raises(DomainError):
            kummer_1f1(1.0, g, 1.0)

    def test_large_argument_refused(self):
        with pytest.raises(AccuracyError):
            kummer_1f1(1.0, 2.0, 60.0)

    def test_term_cap(self):
        with pytest.raises(AccuracyError):
            kummer_1f1(1.0, 2.0, 30.0, Accuracy(max_terms=5))


class TestNormal:
    def test_examples(self):
        assert std_normal_quantile(0.5) == 0.0
        assert abs(std_normal_quantile(0.975) - NORMAL_Q_975) < 1e-9
        assert abs(std_normal_quantile(0.025) + NORMAL_Q_975) < 1e-9

    def test_root_oracle(self):
        root = mp.findroot(lambda x: mp.ncdf(x) - mp.mpf("0.975"), 2.0)
        assert float(root) == pytest.approx(NORMAL_Q_975, rel=1e-15)

    def test_round_trip(self):
        u = np.concatenate([[1e-6, 1e-4], np.linspace(0.01, 0.99, 99), [1 - 1e-4, 1 - 1e-6]])
        assert np.max(np.abs(std_normal_cdf(std_normal_quantile(u)) - u)) < 1e-8

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5, math.nan])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            std_normal_quantile(bad)


def _kolmogorov_oracle(d, n, terms=200):
    lam2 = mp.mpf(n) * mp.mpf(d) ** 2
    s = mp.fsum((-1) ** (k - 1) * mp.exp(-2 * k * k * lam2) for k in range(1, terms + 1))
    return float(min(1, max(0, 2 * s)))


class TestKolmogorov:
    def test_zero_distance(self):
        assert kolmogorov_p(0.0, 10) == 1.0

    def test_large_distance(self):
        assert kolmogorov_p(0.5, 80) < 1e-12

    def test_reference_case(self):
        assert kolmogorov_p(0.05, 695) == pytest.approx(_kolmogorov_oracle(0.05, 695), abs=1e-12)

    @pytest.mark.parametrize("d,n", [(0.02, 695), (0.03, 200), (0.08, 50), (0.2, 30), (0.01, 10)])
    def test_against_series_and_scipy(self, d, n):
        from scipy.special import kolmogorov

        p = kolmogorov_p(d, n)
        assert p == pytest.approx(float(kolmogorov(math.sqrt(n) * d)), abs=1e-10)
        if n * d * d >= 0.05:
            assert p == pytest.approx(_kolmogorov_oracle(d, n), abs=1e-10)

    @given(st.floats(0, 1), st.floats(0, 1), st.integers(1, 2000))
    @settings(max_examples=80, deadline=None)
    def test_bounded_and_decreasing(self, d1, d2, n):
        lo, hi = sorted((d1, d2))
        p_lo, p_hi = kolmogorov_p(lo, n), kolmogorov_p(hi, n)
        assert 0.0 <= p_hi <= p_lo + 1e-12 <= 1.0 + 1e-12

    @pytest.mark.parametrize("d,n", [(-0.1, 5), (0.1, 0), (math.inf, 5)])
    def test_domain(self, d, n):
        with pytest.raises(DomainError):
            kolmogorov_p(d, n)
